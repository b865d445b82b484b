#include "qsemi/mehler.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qsemi/error.hpp"
#include "qsemi/matfun.hpp"

namespace qsemi {

namespace {

constexpr const char* kModule = "mehler";
const cplx kI(0.0, 1.0);

bool real_part_positive_definite(const CMatrix& A) {
  if (A.rows() == 0) return true;
  const RMatrix S = 0.5 * (A.real() + A.real().transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) > 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

CMatrix inverse(const CMatrix& A) { return A.partialPivLu().inverse(); }

}  // namespace

cplx GaussianKernel::operator()(const RVector& x, const RVector& y) const {
  CVector X(2 * n);
  X.head(n) = x.cast<cplx>();
  X.tail(n) = y.cast<cplx>();
  return c * std::exp(-0.5 * (X.transpose() * K * X)(0, 0));
}

MehlerSymbol mehler_symbol(const QuadraticForm& q, double t) {
  MehlerSymbol sym;
  sym.t = t;
  const Eigen::Index d = 2 * q.n;
  if (t == 0.0) {
    sym.M = CMatrix::Zero(d, d);
    return sym;
  }
  BranchTrackedScalar root;
  try {
    root = sqrt_det_cos_tracked(q.Q, t);
  } catch (const Error& e) {
    const ErrorCode code =
        e.code() == ErrorCode::ConjugatePointOnPath ? ErrorCode::DegenerateTime : ErrorCode::PathFailure;
    throw Error(code, kModule, "mehler_symbol", e.what());
  }
  const CMatrix J = standard_J(q.n);
  CMatrix T;
  try {
    T = mat_tan(t * J * q.Q);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateTime, kModule, "mehler_symbol", e.what());
  }
  sym.M = symmetrize(CMatrix(-J * T));
  sym.c = 1.0 / root.value;
  return sym;
}

GaussianKernel kernel_from_symbol(const MehlerSymbol& sym) {
  const BlockForm bf = block_decompose(sym.M);
  const Eigen::Index n = bf.B.rows();
  if (!real_part_positive_definite(bf.B)) {
    throw Error(ErrorCode::NonIntegrableSymbol, kModule, "kernel_from_symbol",
                "Re B is not positive-definite");
  }
  const CMatrix Binv = symmetrize(inverse(bf.B));
  const CMatrix Kk = bf.R - bf.L.transpose() * Binv * bf.L;
  const CMatrix C = Binv * bf.L;
  CMatrix Z(n, 2 * n), W(n, 2 * n);
  Z << 0.5 * CMatrix::Identity(n, n), 0.5 * CMatrix::Identity(n, n);
  W << CMatrix::Identity(n, n), -CMatrix::Identity(n, n);

  GaussianKernel k;
  k.n = static_cast<int>(n);
  k.K = Z.transpose() * Kk * Z + W.transpose() * Binv * W +
        kI * (W.transpose() * C * Z + Z.transpose() * C.transpose() * W);
  k.K = symmetrize(k.K);
  k.c = sym.c * std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(n)) / sqrt_det_accretive(bf.B);
  return k;
}

GaussianKernel kernel(const QuadraticForm& q, double t) { return kernel_from_symbol(mehler_symbol(q, t)); }

GaussianKernel twisted_kernel(const RMatrix& N, double eps) {
  const Eigen::Index n = N.rows();
  CMatrix W(n, 2 * n), Ex = CMatrix::Zero(n, 2 * n);
  W << CMatrix::Identity(n, n), -CMatrix::Identity(n, n);
  Ex.leftCols(n).setIdentity();
  const CMatrix Nc = to_complex(N);
  GaussianKernel k;
  k.n = static_cast<int>(n);
  k.K = W.transpose() * W / eps - kI * (W.transpose() * Nc * Ex + Ex.transpose() * Nc.transpose() * W);
  k.K = symmetrize(k.K);
  k.c = std::pow(2.0 * std::numbers::pi * eps, -0.5 * static_cast<double>(n));
  return k;
}

KernelDiagnostics diagnostics_PVMN(const MehlerSymbol& sym) {
  const BlockForm bf = block_decompose(sym.M);
  const Eigen::Index n = bf.B.rows();
  const RMatrix ReB = bf.B.real(), ImB = bf.B.imag();
  const RMatrix ReL = bf.L.real(), ImL = bf.L.imag();
  Eigen::LLT<RMatrix> llt(0.5 * (ReB + ReB.transpose()));
  if (llt.info() != Eigen::Success || !real_part_positive_definite(bf.B)) {
    throw Error(ErrorCode::NonIntegrableSymbol, kModule, "diagnostics_PVMN", "Re B is not positive-definite");
  }
  const RMatrix ReBinv = llt.solve(RMatrix::Identity(n, n));
  const RMatrix I = RMatrix::Identity(n, n);
  KernelDiagnostics d;
  d.P = symmetrize(RMatrix((ReB + ImB * ReBinv * ImB).inverse()));
  d.V = symmetrize(RMatrix(bf.R.real() - ReL.transpose() * ReBinv * ReL));
  d.Mleft = I - 0.5 * ImL + 0.5 * ImB * ReBinv * ReL;
  d.Nright = I + 0.5 * ImL - 0.5 * ImB * ReBinv * ReL;
  return d;
}

GaussianKernel compose_kernels(const GaussianKernel& k1, const GaussianKernel& k2) {
  if (k1.n != k2.n) throw Error(ErrorCode::DimensionMismatch, kModule, "compose_kernels", "");
  const int n = k1.n;
  const CMatrix A = k1.Kyy() + k2.Kxx();
  if (!real_part_positive_definite(A)) {
    throw Error(ErrorCode::NonIntegrableComposition, kModule, "compose_kernels",
                "middle block has no positive-definite real part");
  }
  const CMatrix Ainv = inverse(A);
  CMatrix left(2 * n, n);
  left << k1.Kxy(), k2.Kyx();
  GaussianKernel k;
  k.n = n;
  k.K = CMatrix::Zero(2 * n, 2 * n);
  k.K.topLeftCorner(n, n) = k1.Kxx();
  k.K.bottomRightCorner(n, n) = k2.Kyy();
  k.K -= left * Ainv * left.transpose();
  k.K = symmetrize(k.K);
  k.c = k1.c * k2.c * std::pow(2.0 * std::numbers::pi, 0.5 * n) / sqrt_det_accretive(A);
  return k;
}

RMatrix twisted_form_matrix(const RMatrix& N) {
  const Eigen::Index n = N.rows();
  RMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = N.transpose() * N;
  m.topRightCorner(n, n) = N;
  m.bottomLeftCorner(n, n) = -N;
  m.bottomRightCorner(n, n).setIdentity();
  return m;
}

MehlerInverse mehler_inverse_twisted(const RMatrix& N, double s) {
  const Eigen::Index n = N.rows();
  const RMatrix frak = twisted_form_matrix(N);
  const double bound = 1.0 / (std::sqrt(2.0) * op_norm(frak));
  if (!(std::abs(s) < bound)) {
    throw Error(ErrorCode::SeriesRegimeViolated, kModule, "mehler_inverse_twisted",
                "s = " + std::to_string(s) + ", bound " + std::to_string(bound));
  }
  const RMatrix J = standard_J(static_cast<int>(n)).real();
  const RMatrix F = s * J * frak;
  MehlerInverse out;
  RMatrix Fk = RMatrix::Identity(2 * n, 2 * n);
  out.Rs = frak;
  out.terms = 1;
  for (int k = 1; k < 400; ++k) {
    Fk = Fk * F;
    const RMatrix term = Fk.transpose() * frak * Fk / static_cast<double>(2 * k + 1);
    out.Rs += term;
    out.terms = k + 1;
    if (term.norm() <= 1e-18 * out.Rs.norm()) break;
  }
  out.Rs = symmetrize(out.Rs);
  out.prefactor = sqrt_det_cos_tracked(to_complex(out.Rs), s).value.real();
  return out;
}

GaussianKernel kernel_left_phase(const GaussianKernel& k, const CMatrix& V) {
  GaussianKernel out = k;
  out.K.topLeftCorner(k.n, k.n) -= kI * symmetrize(V);
  return out;
}

GaussianKernel kernel_right_phase(const GaussianKernel& k, const CMatrix& V) {
  GaussianKernel out = k;
  out.K.bottomRightCorner(k.n, k.n) -= kI * symmetrize(V);
  return out;
}

GaussianKernel kernel_right_multiplier(const GaussianKernel& k, const CMatrix& C) {
  const int n = k.n;
  const CMatrix A = k.Kyy();
  if (!real_part_positive_definite(A)) {
    throw Error(ErrorCode::NonIntegrableComposition, kModule, "kernel_right_multiplier",
                "y-block has no positive-definite real part");
  }
  const CMatrix Ainv = symmetrize(inverse(A));
  const CMatrix Sigma = Ainv + 2.0 * symmetrize(C);
  const CMatrix Ap = symmetrize(inverse(Sigma));
  GaussianKernel out;
  out.n = n;
  out.K = CMatrix::Zero(2 * n, 2 * n);
  const CMatrix Kyx = Ap * Ainv * k.Kyx();
  out.K.topLeftCorner(n, n) = k.Kxx() - k.Kxy() * (Ainv - Ainv * Ap * Ainv) * k.Kyx();
  out.K.bottomLeftCorner(n, n) = Kyx;
  out.K.topRightCorner(n, n) = Kyx.transpose();
  out.K.bottomRightCorner(n, n) = Ap;
  out.K = symmetrize(out.K);
  out.c = k.c * sqrt_det_accretive(Ainv) / sqrt_det_accretive(Sigma);
  return out;
}

GaussianKernel kernel_right_flow(const GaussianKernel& k, const RMatrix& M, double t) {
  const int n = k.n;
  CMatrix T = CMatrix::Identity(2 * n, 2 * n);
  T.bottomRightCorner(n, n) = mat_exp(to_complex(RMatrix(-t * M)));
  GaussianKernel out;
  out.n = n;
  out.K = symmetrize(CMatrix(T.transpose() * k.K * T));
  out.c = k.c * std::exp(-t * M.trace());
  return out;
}

double kernel_distance(const GaussianKernel& a, const GaussianKernel& b) {
  const double dc = std::abs(a.c - b.c) / std::max(std::abs(b.c), 1e-300);
  const double dK = (a.K - b.K).norm() / std::max(b.K.norm(), 1e-300);
  return std::max(dc, dK);
}

}  // namespace qsemi
