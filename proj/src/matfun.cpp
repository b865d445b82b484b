#include "qsemi/matfun.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qsemi/error.hpp"

namespace qsemi {

namespace {

constexpr const char* kModule = "matfun";

void require_square(const CMatrix& A, const char* op) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::NonSquare, kModule, op,
                std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
}

void require_finite(const CMatrix& A, const char* op) {
  if (!A.allFinite()) throw Error(ErrorCode::NonFinite, kModule, op, "");
}

double norm1(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

CMatrix identity_like(const CMatrix& A) { return CMatrix::Identity(A.rows(), A.cols()); }

CMatrix pade13(const CMatrix& A) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  const CMatrix I = identity_like(A);
  const CMatrix A2 = A * A;
  const CMatrix A4 = A2 * A2;
  const CMatrix A6 = A4 * A2;
  const CMatrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 +
                         b[3] * A2 + b[1] * I);
  const CMatrix V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

// Denman-Beavers iteration for the principal square root.
CMatrix sqrt_db(const CMatrix& A) {
  CMatrix Y = A;
  CMatrix Z = identity_like(A);
  for (int it = 0; it < 100; ++it) {
    const CMatrix Yinv = Y.partialPivLu().inverse();
    const CMatrix Zinv = Z.partialPivLu().inverse();
    const CMatrix Yn = 0.5 * (Y + Zinv);
    const CMatrix Zn = 0.5 * (Z + Yinv);
    const double change = norm1(Yn - Y);
    Y = Yn;
    Z = Zn;
    if (change <= 1e-15 * std::max(1.0, norm1(Y))) break;
  }
  return Y;
}

template <typename Mat>
Mat null_space_impl(const Mat& A, double tol) {
  const Eigen::Index cols = A.cols();
  if (cols == 0) return Mat(0, 0);
  if (A.rows() == 0) return Mat::Identity(cols, cols);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double threshold = smax < tol ? tol : tol * smax;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= threshold) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace

double default_tol() {
  static const double tol = [] {
    if (const char* env = std::getenv("QSEMI_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && v > 0.0 && std::isfinite(v)) return v;
    }
    return kDefaultTol;
  }();
  return tol;
}

CMatrix mat_exp(const CMatrix& A) {
  require_square(A, "mat_exp");
  require_finite(A, "mat_exp");
  if (A.rows() == 0) return A;
  constexpr double theta13 = 5.371920351148152;
  const double nrm = norm1(A);
  int s = 0;
  if (nrm > theta13) s = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
  CMatrix R = pade13(A / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) R = R * R;
  return R;
}

CMatrix mat_log_principal(const CMatrix& A) {
  require_square(A, "mat_log_principal");
  require_finite(A, "mat_log_principal");
  if (A.rows() == 0) return A;
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  const double scale = std::max(1.0, norm1(A));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const cplx lam = es.eigenvalues()(i);
    const bool on_cut = lam.real() <= 0.0 && std::abs(lam.imag()) <= 1e-10 * scale;
    if (std::abs(lam) <= 1e-14 * scale || on_cut) {
      throw Error(ErrorCode::BranchCut, kModule, "mat_log_principal",
                  "eigenvalue " + std::to_string(lam.real()) + "+" + std::to_string(lam.imag()) + "i");
    }
  }
  const CMatrix I = identity_like(A);
  CMatrix X = A;
  int k = 0;
  while (norm1(X - I) >= 0.25) {
    X = sqrt_db(X);
    if (++k > 64) throw Error(ErrorCode::BranchCut, kModule, "mat_log_principal", "no convergence");
  }
  const CMatrix Zc = (X - I) * (X + I).partialPivLu().inverse();
  const CMatrix Z2 = Zc * Zc;
  CMatrix term = Zc;
  CMatrix sum = Zc;
  for (int j = 1; j < 200; ++j) {
    term = term * Z2;
    const CMatrix add = term / static_cast<double>(2 * j + 1);
    sum += add;
    if (norm1(add) <= 1e-18 * std::max(1.0, norm1(sum))) break;
  }
  return std::ldexp(2.0, k) * sum;
}

CMatrix mat_cos(const CMatrix& A) {
  require_square(A, "mat_cos");
  const cplx i(0.0, 1.0);
  return 0.5 * (mat_exp(i * A) + mat_exp(-i * A));
}

CMatrix mat_sin(const CMatrix& A) {
  require_square(A, "mat_sin");
  const cplx i(0.0, 1.0);
  return (mat_exp(i * A) - mat_exp(-i * A)) / (2.0 * i);
}

CMatrix mat_tan(const CMatrix& A) {
  require_square(A, "mat_tan");
  const CMatrix c = mat_cos(A);
  const cplx d = c.determinant();
  if (std::abs(d) <= 1e-12) {
    throw Error(ErrorCode::SingularCos, kModule, "mat_tan", "|det cos| = " + std::to_string(std::abs(d)));
  }
  return c.partialPivLu().solve(mat_sin(A));
}

CMatrix mat_arctan(const CMatrix& A) {
  require_square(A, "mat_arctan");
  require_finite(A, "mat_arctan");
  if (A.rows() == 0) return A;
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  if (rho >= 1.0) {
    throw Error(ErrorCode::SpectralRadiusTooLarge, kModule, "mat_arctan", "rho = " + std::to_string(rho));
  }
  const cplx i(0.0, 1.0);
  const CMatrix I = identity_like(A);
  const CMatrix ratio = (I - i * A).partialPivLu().solve(I + i * A);
  return -0.5 * i * mat_log_principal(ratio);
}

BranchTrackedScalar sqrt_det_cos_tracked(const CMatrix& Q, double t, int steps) {
  require_square(Q, "sqrt_det_cos_tracked");
  if (Q.rows() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "sqrt_det_cos_tracked", "odd dimension");
  }
  const Eigen::Index n = Q.rows() / 2;
  CMatrix J = CMatrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -CMatrix::Identity(n, n);
  const CMatrix F = J * Q;

  BranchTrackedScalar out;
  out.path_parameter = t;
  if (t == 0.0) {
    out.steps_used = 0;
    return out;
  }
  constexpr int kMaxSteps = 1 << 16;
  for (int m = std::max(1, steps); m <= kMaxSteps; m *= 2) {
    cplx prev(1.0, 0.0);
    bool ok = true;
    for (int k = 1; k <= m; ++k) {
      const double s = t * static_cast<double>(k) / m;
      const cplx d = mat_cos(s * F).determinant();
      if (std::abs(d) <= 1e-12) {
        throw Error(ErrorCode::ConjugatePointOnPath, kModule, "sqrt_det_cos_tracked",
                    "s = " + std::to_string(s));
      }
      cplx r = std::sqrt(d);
      if (std::abs(-r - prev) < std::abs(r - prev)) r = -r;
      if (std::abs(std::arg(r / prev)) > std::numbers::pi / 4) {
        ok = false;
        break;
      }
      prev = r;
    }
    if (ok) {
      out.value = prev;
      out.steps_used = m;
      return out;
    }
  }
  throw Error(ErrorCode::InsufficientSteps, kModule, "sqrt_det_cos_tracked",
              "phase jump persists at " + std::to_string(kMaxSteps) + " steps");
}

CMatrix null_space(const CMatrix& A, double tol) { return null_space_impl(A, tol); }
RMatrix null_space(const RMatrix& A, double tol) { return null_space_impl(A, tol); }

PsdResult psd_check(const CMatrix& H, double tol) {
  require_square(H, "psd_check");
  if (H.rows() == 0) return {true, 0.0};
  const CMatrix S = 0.5 * (H + H.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return {lmin >= -tol, lmin};
}

PsdResult psd_check(const RMatrix& H, double tol) { return psd_check(to_complex(H), tol); }

cplx sqrt_det_accretive(const CMatrix& A) {
  require_square(A, "sqrt_det_accretive");
  const Eigen::Index n = A.rows();
  if (n == 0) return {1.0, 0.0};
  const RMatrix Ar = 0.5 * (A.real() + A.real().transpose());
  const RMatrix Ai = 0.5 * (A.imag() + A.imag().transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(Ar);
  const RVector& lam = es.eigenvalues();
  if (lam(0) <= 0.0) {
    throw Error(ErrorCode::NotAccretive, kModule, "sqrt_det_accretive",
                "lambda_min(Re A) = " + std::to_string(lam(0)));
  }
  const RMatrix U = es.eigenvectors();
  const RMatrix S = U * lam.cwiseInverse().cwiseSqrt().asDiagonal() * U.transpose();
  const RMatrix C = S * Ai * S;
  Eigen::SelfAdjointEigenSolver<RMatrix> ec(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
  cplx value(1.0, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    value *= std::sqrt(lam(j)) * std::sqrt(cplx(1.0, ec.eigenvalues()(j)));
  }
  return value;
}

double op_norm(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(A);
  return svd.singularValues()(0);
}

double op_norm(const RMatrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::JacobiSVD<RMatrix> svd(A);
  return svd.singularValues()(0);
}

CMatrix symmetrize(const CMatrix& A) { return 0.5 * (A + A.transpose()); }
RMatrix symmetrize(const RMatrix& A) { return 0.5 * (A + A.transpose()); }

}  // namespace qsemi
