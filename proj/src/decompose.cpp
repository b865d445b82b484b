#include "qsemi/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "qsemi/error.hpp"
#include "qsemi/matfun.hpp"

namespace qsemi {

namespace {

constexpr const char* kModule = "decompose";
const cplx kI(0.0, 1.0);

RMatrix real_part_checked(const CMatrix& X, double tol, const char* op, const char* what, double* imag_norm) {
  const double im = X.imag().norm();
  if (imag_norm) *imag_norm = im;
  if (im > tol * std::max(1.0, X.real().norm())) {
    throw Error(ErrorCode::NotRealWithinTol, kModule, op,
                std::string(what) + ": |Im| = " + std::to_string(im));
  }
  return symmetrize(RMatrix(X.real()));
}

CMatrix jinv_times(const CMatrix& X) {
  const Eigen::Index n = X.rows() / 2;
  // J^{-1} = -J
  CMatrix out(X.rows(), X.cols());
  out.topRows(n) = -X.bottomRows(n);
  out.bottomRows(n) = X.topRows(n);
  return out;
}

RMatrix block_diag(const RMatrix& top, const RMatrix& bottom) {
  const Eigen::Index n = top.rows();
  RMatrix out = RMatrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = top;
  out.bottomRightCorner(n, n) = bottom;
  return out;
}

RMatrix off_diag(const RMatrix& M) {
  const Eigen::Index n = M.rows();
  RMatrix out = RMatrix::Zero(2 * n, 2 * n);
  out.topRightCorner(n, n) = M.transpose();
  out.bottomLeftCorner(n, n) = M;
  return out;
}

struct UnitaryParams {
  RMatrix D, M, W;
};

UnitaryParams params_from_K(const RMatrix& K) {
  const Eigen::Index n = K.rows() / 2;
  return {symmetrize(RMatrix(K.bottomRightCorner(n, n))), -2.0 * K.bottomLeftCorner(n, n),
          -2.0 * symmetrize(RMatrix(K.topLeftCorner(n, n)))};
}

CMatrix unitary_product_params(const UnitaryParams& p, double t) {
  const Eigen::Index n = p.D.rows();
  const CMatrix J = standard_J(static_cast<int>(n));
  const RMatrix Z = RMatrix::Zero(n, n);
  return mat_exp(2.0 * t * J * to_complex(block_diag(Z, p.D))) *
         mat_exp(-t * J * to_complex(off_diag(p.M))) * mat_exp(-t * J * to_complex(block_diag(p.W, Z)));
}

RMatrix phi(const RMatrix& K, double t) {
  const CMatrix L = mat_log_principal(unitary_product_params(params_from_K(K), t));
  return symmetrize(RMatrix((jinv_times(L) / (2.0 * t)).real()));
}

std::vector<std::pair<int, int>> upper_indices(Eigen::Index d) {
  std::vector<std::pair<int, int>> idx;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) idx.emplace_back(i, j);
  }
  return idx;
}

// Largest c with tA - c*frak >= 0; 0 when frak does not vanish on Ker(tA).
double pencil_capacity(const RMatrix& tA, const RMatrix& frak, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetrize(tA));
  const RVector& lam = es.eigenvalues();
  const RMatrix& V = es.eigenvectors();
  const double lmax = std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<int> range, null;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    (lam(i) > rel_tol * lmax ? range : null).push_back(static_cast<int>(i));
  }
  for (int i : null) {
    if ((frak * V.col(i)).norm() > 1e-6 * std::max(1.0, frak.norm())) return 0.0;
  }
  if (range.empty()) return 0.0;
  const Eigen::Index r = static_cast<Eigen::Index>(range.size());
  RMatrix Vr(V.rows(), r);
  RVector scale(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    Vr.col(j) = V.col(range[j]);
    scale(j) = 1.0 / std::sqrt(lam(range[j]));
  }
  const RMatrix Mtx = scale.asDiagonal() * (Vr.transpose() * frak * Vr) * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMatrix> em(symmetrize(Mtx), Eigen::EigenvaluesOnly);
  const double top = em.eigenvalues()(r - 1);
  if (top <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / top;
}

[[noreturn]] void rethrow_stage(const Error& e, const std::string& stage) {
  throw Error(e.code(), e.module(), e.operation(), "stage " + stage + ": " + e.detail());
}

}  // namespace

CMatrix weyl_exp_matrix(const CMatrix& P) {
  const int n = static_cast<int>(P.rows() / 2);
  return mat_exp(-2.0 * kI * standard_J(n) * P);
}

std::vector<double> TGrid::values() const {
  std::vector<double> out;
  if (points <= 1) {
    out.push_back(t_min);
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    out.push_back(log_spaced ? t_min * std::pow(t_max / t_min, f) : t_min + f * (t_max - t_min));
  }
  return out;
}

PolarFactors polar_factors(const QuadraticForm& q, double t, double tol) {
  if (!(t > 0.0)) throw Error(ErrorCode::DegenerateTime, kModule, "polar_factors", "t must be positive");
  const CMatrix J = standard_J(q.n);
  PolarFactors pf;
  pf.t = t;
  const CMatrix Eq = mat_exp(-2.0 * kI * t * J * q.Q);
  const CMatrix EqBar = mat_exp(-2.0 * kI * t * J * q.Q.conjugate());
  const CMatrix LA = mat_log_principal(Eq * EqBar);
  // (-4itJ)^{-1} L = J^{-1} L / (-4it)
  pf.A = real_part_checked(jinv_times(LA) / (-4.0 * kI * t), tol, "polar_factors", "A", &pf.imag_A);
  const PsdResult psd = psd_check(pf.A, tol * std::max(1.0, pf.A.norm()));
  if (!psd.psd) {
    throw Error(ErrorCode::NotPSDWithinTol, kModule, "polar_factors",
                "lambda_min(A) = " + std::to_string(psd.lambda_min));
  }
  const CMatrix EA = mat_exp(2.0 * kI * t * J * to_complex(pf.A));
  const CMatrix LB = mat_log_principal(EA * Eq);
  pf.B = real_part_checked(jinv_times(LB) / (2.0 * t), tol, "polar_factors", "B", &pf.imag_B);
  const CMatrix recon = mat_exp(-2.0 * kI * t * J * to_complex(pf.A)) * mat_exp(2.0 * t * J * to_complex(pf.B));
  pf.reconstruction_residual = (recon - Eq).norm();
  return pf;
}

UnitaryFactors unitary_factorization(const RMatrix& B, double t) {
  const Eigen::Index d = B.rows();
  const Eigen::Index n = d / 2;
  UnitaryFactors out;
  if (t == 0.0) {
    out.D = out.M = out.W = RMatrix::Zero(n, n);
    return out;
  }
  if (t * op_norm(B) > 1.0) {
    throw Error(ErrorCode::TimeTooLarge, kModule, "unitary_factorization",
                "|tB| = " + std::to_string(t * op_norm(B)));
  }
  const RMatrix Bs = symmetrize(B);
  const auto idx = upper_indices(d);
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  auto pack = [&](const RMatrix& X) {
    RVector v(m);
    for (Eigen::Index k = 0; k < m; ++k) v(k) = X(idx[k].first, idx[k].second);
    return v;
  };
  auto unpack = [&](const RVector& v) {
    RMatrix X(d, d);
    for (Eigen::Index k = 0; k < m; ++k) X(idx[k].first, idx[k].second) = X(idx[k].second, idx[k].first) = v(k);
    return X;
  };

  constexpr int kMaxIter = 25;
  constexpr double kNewtonTol = 1e-12;
  RVector x = pack(Bs);
  const RVector target = pack(Bs);
  RVector r = pack(phi(unpack(x), t)) - target;
  double res = r.norm();
  int it = 0;
  while (res > kNewtonTol && it < kMaxIter) {
    const double h = 1e-6 * std::max(1.0, x.norm());
    RMatrix Jac(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      RVector xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      Jac.col(k) = (pack(phi(unpack(xp), t)) - pack(phi(unpack(xm), t))) / (2.0 * h);
    }
    x -= Jac.partialPivLu().solve(r);
    r = pack(phi(unpack(x), t)) - target;
    res = r.norm();
    ++it;
    if (!std::isfinite(res)) break;
  }
  if (!(res <= kNewtonTol)) {
    throw Error(ErrorCode::NewtonDiverged, kModule, "unitary_factorization",
                "residual " + std::to_string(res) + " after " + std::to_string(it) + " iterations");
  }
  const UnitaryParams p = params_from_K(unpack(x));
  out.D = p.D;
  out.M = p.M;
  out.W = p.W;
  out.iterations = it;
  const CMatrix J = standard_J(static_cast<int>(n));
  out.residual = (unitary_product(out, t) - mat_exp(2.0 * t * J * to_complex(Bs))).norm();
  return out;
}

CMatrix unitary_product(const UnitaryFactors& u, double t) { return unitary_product_params({u.D, u.M, u.W}, t); }

StrangResult strang_middle(const RMatrix& A, const RMatrix& B, double eps2, double tol) {
  const double na = op_norm(A), nb = op_norm(B);
  if (!(na < kStrangRadius) || !(nb < kStrangRadius)) {
    throw Error(ErrorCode::RadiusExceeded, kModule, "strang_middle",
                "|A| = " + std::to_string(na) + ", |B| = " + std::to_string(nb));
  }
  const int n = static_cast<int>(A.rows() / 2);
  const CMatrix J = standard_J(n);
  const CMatrix Ac = to_complex(A), Bc = to_complex(B);
  const CMatrix EB = mat_exp(2.0 * kI * J * Bc);
  const CMatrix L = mat_log_principal(EB * mat_exp(-2.0 * kI * J * Ac) * EB);
  // (-2iJ)^{-1} L = J^{-1} L / (-2i)
  StrangResult out;
  out.P = real_part_checked(jinv_times(L) / (-2.0 * kI), 1e-9, "strang_middle", "P", nullptr);
  const CMatrix EBm = mat_exp(-2.0 * kI * J * Bc);
  out.reconstruction_residual =
      (EBm * weyl_exp_matrix(to_complex(out.P)) * EBm - weyl_exp_matrix(Ac)).norm();

  const double scale = std::max(1e-300, na);
  const bool ordered = psd_check(B, 1e-12 * scale).psd && psd_check(RMatrix(A - 5.0 * B), 1e-12 * scale).psd;
  if (ordered) {
    out.positivity_checked = true;
    out.positivity_margin = psd_check(RMatrix(out.P - 0.5 * A), 0.0).lambda_min;
    if (out.positivity_margin < -tol && na < eps2) {
      throw Error(ErrorCode::NotPSDWithinTol, kModule, "strang_middle",
                  "lambda_min(P - A/2) = " + std::to_string(out.positivity_margin));
    }
  }
  return out;
}

GammaSelection select_gamma(const QuadraticForm& q, const SingularSpaceReport& report,
                            const GraphCertificate& cert, const TGrid& grid, double tol) {
  GammaSelection sel;
  sel.alpha = 2 * report.k0 + 1;
  const QuadraticForm qt = conjugate_by_linear(q, shear(cert.Gsym));
  const RMatrix frak = twisted_form_matrix(cert.N);
  std::vector<PolarFactors> polars;
  for (double t : grid.values()) {
    PolarFactors pf;
    try {
      pf = polar_factors(qt, t, tol);
    } catch (const Error&) {
      break;
    }
    const double cap = pencil_capacity(t * pf.A, frak, std::max(tol, 1e-10));
    const double g = cap / (10.0 * std::pow(t, sel.alpha));
    if (!(g > 0.0) || !std::isfinite(g)) break;
    sel.t_values.push_back(t);
    sel.gamma_t.push_back(g);
    polars.push_back(pf);
  }
  if (sel.gamma_t.empty()) {
    throw Error(ErrorCode::GammaCollapsed, kModule, "select_gamma",
                "no grid point admits a positive gamma_t");
  }
  sel.gamma = 0.9 * *std::min_element(sel.gamma_t.begin(), sel.gamma_t.end());

  // Validity horizon: downstream stages must pass at every grid point up to t0.
  std::size_t valid = 0;
  for (std::size_t i = 0; i < sel.t_values.size(); ++i) {
    const double t = sel.t_values[i];
    const double s = sel.gamma * std::pow(t, sel.alpha);
    try {
      const MehlerInverse mi = mehler_inverse_twisted(cert.N, s);
      strang_middle(t * polars[i].A, s * mi.Rs);
      unitary_factorization(polars[i].B, t);
    } catch (const Error&) {
      break;
    }
    valid = i + 1;
  }
  if (valid == 0) {
    throw Error(ErrorCode::GammaCollapsed, kModule, "select_gamma", "downstream stages fail at t_min");
  }
  sel.t_values.resize(valid);
  sel.gamma_t.resize(valid);
  sel.gamma = 0.9 * *std::min_element(sel.gamma_t.begin(), sel.gamma_t.end());
  sel.t0 = sel.t_values.back();
  return sel;
}

DecompositionFactors build_decomposition(const QuadraticForm& q, double t, const TGrid& grid, double tol) {
  DecompositionFactors f;
  f.q = q;
  f.t = t;
  f.report = singular_space(q, tol);
  const auto cert = graph_condition(f.report, tol);
  if (!cert) {
    throw Error(ErrorCode::GraphConditionFailed, kModule, "build_decomposition",
                "S meets {0} x R^n nontrivially");
  }
  f.cert = *cert;
  f.alpha = 2 * f.report.k0 + 1;

  GammaSelection sel;
  try {
    sel = select_gamma(q, f.report, f.cert, grid, tol);
  } catch (const Error& e) {
    rethrow_stage(e, "select_gamma");
  }
  f.gamma = sel.gamma;
  f.t0 = sel.t0;
  if (!(t > 0.0) || t > f.t0 * (1.0 + 1e-12)) {
    throw Error(ErrorCode::TimeTooLarge, kModule, "build_decomposition",
                "t = " + std::to_string(t) + ", t0 = " + std::to_string(f.t0));
  }
  const QuadraticForm qt = conjugate_by_linear(q, shear(f.cert.Gsym));
  try {
    f.polar = polar_factors(qt, t, tol);
  } catch (const Error& e) {
    rethrow_stage(e, "polar_factors");
  }
  try {
    f.unitary = unitary_factorization(f.polar.B, t);
  } catch (const Error& e) {
    rethrow_stage(e, "unitary_factorization");
  }
  f.s = f.gamma * std::pow(t, f.alpha);
  try {
    f.inverse = mehler_inverse_twisted(f.cert.N, f.s);
  } catch (const Error& e) {
    rethrow_stage(e, "mehler_inverse_twisted");
  }
  try {
    f.strang = strang_middle(t * f.polar.A, f.s * f.inverse.Rs);
  } catch (const Error& e) {
    rethrow_stage(e, "strang_middle");
  }
  f.Pt = f.strang.P / t;
  f.c_t = std::exp(0.5 * t * f.unitary.M.trace()) / (f.inverse.prefactor * f.inverse.prefactor);
  return f;
}

DecompositionFactors build_decomposition(const QuadraticForm& q, double t) {
  return build_decomposition(q, t, TGrid{}, default_tol());
}

VerificationResult verify_decomposition(const DecompositionFactors& f, double /*tol*/) {
  const int n = f.q.n;
  const double t = f.t;
  const CMatrix J = standard_J(n);
  const RMatrix Z = RMatrix::Zero(n, n);
  const RMatrix& Gs = f.cert.Gsym;
  const RMatrix right_phase = t * f.unitary.W - Gs;

  VerificationResult out;
  const CMatrix twisted = weyl_exp_matrix(to_complex(RMatrix(f.s * f.inverse.Rs)));
  const CMatrix product = mat_exp(-J * to_complex(block_diag(Gs, Z))) * twisted *
                          weyl_exp_matrix(to_complex(RMatrix(t * f.Pt))) * twisted *
                          mat_exp(2.0 * t * J * to_complex(block_diag(Z, f.unitary.D))) *
                          mat_exp(-t * J * to_complex(off_diag(f.unitary.M))) *
                          mat_exp(-J * to_complex(block_diag(right_phase, Z)));
  out.matrix_residual = (product - weyl_exp_matrix(t * f.q.Q)).norm();

  const GaussianKernel tw = twisted_kernel(f.cert.N, 2.0 * f.s);
  GaussianKernel k = kernel_left_phase(tw, to_complex(Gs));
  const QuadraticForm p = QuadraticForm::from_matrix(to_complex(f.Pt), 1e-8);
  try {
    k = compose_kernels(k, kernel(p, t));
  } catch (const Error& e) {
    rethrow_stage(e, "twisted o e^{-tp}");
  }
  try {
    k = compose_kernels(k, tw);
  } catch (const Error& e) {
    rethrow_stage(e, "e^{-tp} o twisted");
  }
  try {
    k = kernel_right_multiplier(k, kI * t * to_complex(f.unitary.D));
  } catch (const Error& e) {
    rethrow_stage(e, "twisted o e^{itD grad.grad}");
  }
  k = kernel_right_flow(k, f.unitary.M, t);
  k = kernel_right_phase(k, to_complex(right_phase));
  k.c *= f.c_t;
  out.kernel_residual = kernel_distance(k, kernel(f.q, t));
  return out;
}

}  // namespace qsemi
