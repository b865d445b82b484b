#include "qsemi/evolve.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qsemi/error.hpp"
#include "qsemi/matfun.hpp"
#include "qsemi/singular.hpp"

namespace qsemi {

namespace {

constexpr const char* kModule = "evolve";
const cplx kI(0.0, 1.0);
constexpr double kInf = std::numeric_limits<double>::infinity();

double inv_or_zero(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

std::vector<int> unravel(const std::vector<Axis>& axes, std::size_t index) {
  std::vector<int> idx(axes.size());
  for (std::size_t d = axes.size(); d-- > 0;) {
    idx[d] = static_cast<int>(index % axes[d].points);
    index /= axes[d].points;
  }
  return idx;
}

struct GridPrep {
  std::vector<RVector> nodes;
  std::vector<cplx> wu;       // weight * u
  std::vector<double> logwu;  // log |weight * u|
  std::vector<cplx> quad;     // -Kyy y.y / 2
};

GridPrep prepare(const GaussianKernel& k, const GridFunction& u) {
  if (u.n != k.n || static_cast<int>(u.axes.size()) != u.n) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "apply_kernel_grid", "");
  }
  const double kyy = op_norm(k.Kyy());
  double umax = 0.0;
  for (const cplx& v : u.samples) umax = std::max(umax, std::abs(v));
  for (const Axis& ax : u.axes) {
    if (ax.points < 2) throw Error(ErrorCode::ResolutionTooCoarse, kModule, "apply_kernel_grid", "points < 2");
    if (kyy * ax.step() * ax.step() > 1.0) {
      throw Error(ErrorCode::ResolutionTooCoarse, kModule, "apply_kernel_grid",
                  "kernel width below grid spacing " + std::to_string(ax.step()));
    }
  }
  GridPrep prep;
  const std::size_t N = u.size();
  prep.nodes.resize(N);
  prep.wu.resize(N);
  prep.logwu.resize(N);
  prep.quad.resize(N);
  double boundary = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    const std::vector<int> idx = unravel(u.axes, j);
    for (std::size_t d = 0; d < idx.size(); ++d) {
      if (idx[d] == 0 || idx[d] == u.axes[d].points - 1) boundary = std::max(boundary, std::abs(u.samples[j]));
    }
    prep.nodes[j] = u.node(j);
    prep.wu[j] = u.weight(j) * u.samples[j];
    const double a = std::abs(prep.wu[j]);
    prep.logwu[j] = a > 0.0 ? std::log(a) : -kInf;
    const CVector y = prep.nodes[j].cast<cplx>();
    prep.quad[j] = -0.5 * (y.transpose() * k.Kyy() * y)(0, 0);
  }
  if (umax > 0.0 && boundary > 1e-8 * umax) {
    throw Error(ErrorCode::TruncationTooLarge, kModule, "apply_kernel_grid",
                "input does not decay at the domain boundary");
  }
  return prep;
}

cplx node_value(const GaussianKernel& k, const GridPrep& prep, const RVector& xr, std::vector<cplx>& phi) {
  const CVector x = xr.cast<cplx>();
  const cplx ex = -0.5 * (x.transpose() * k.Kxx() * x)(0, 0);
  const CVector a = k.Kyx() * x;
  const std::size_t N = prep.nodes.size();
  double top = -kInf;
  for (std::size_t j = 0; j < N; ++j) {
    cplx lin = 0.0;
    for (Eigen::Index d = 0; d < a.size(); ++d) lin += a(d) * prep.nodes[j](d);
    phi[j] = ex - lin + prep.quad[j];
    top = std::max(top, phi[j].real() + prep.logwu[j]);
  }
  cplx sum = 0.0;
  const double cutoff = top - 46.0;
  for (std::size_t j = 0; j < N; ++j) {
    if (phi[j].real() + prep.logwu[j] >= cutoff) sum += prep.wu[j] * std::exp(phi[j]);
  }
  return k.c * sum;
}

GridFunction output_like(const GridFunction& u) {
  GridFunction out;
  out.n = u.n;
  out.axes = u.axes;
  out.samples.assign(u.size(), cplx(0.0));
  return out;
}

double log_det_spd(const RMatrix& A) {
  Eigen::LLT<RMatrix> llt(A);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

using MultiIndex = std::array<int, 2>;
using Poly = std::map<MultiIndex, cplx>;

// d_j (P e^phi) = (d_j P + P d_j phi) e^phi, phi = -Ax.x/2 + b.x
Poly differentiate(const Poly& P, int j, const CMatrix& A, const CVector& b) {
  Poly out;
  for (const auto& [e, c] : P) {
    if (e[j] > 0) {
      MultiIndex f = e;
      f[j] -= 1;
      out[f] += c * static_cast<double>(e[j]);
    }
    out[e] += c * b(j);
    for (Eigen::Index kk = 0; kk < A.rows(); ++kk) {
      MultiIndex f = e;
      f[kk] += 1;
      out[f] -= c * A(j, kk);
    }
  }
  return out;
}

cplx eval_poly(const Poly& P, const RVector& x) {
  cplx s = 0.0;
  for (const auto& [e, c] : P) {
    double m = 1.0;
    for (Eigen::Index d = 0; d < x.size(); ++d) m *= std::pow(x(d), e[d]);
    s += c * m;
  }
  return s;
}

double binomial(int m, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
  return r;
}

}  // namespace

cplx GaussianState::operator()(const RVector& x) const {
  const CVector xc = x.cast<cplx>();
  return c * std::exp(-0.5 * (xc.transpose() * A * xc)(0, 0) + (b.transpose() * xc)(0, 0));
}

GaussianState GaussianState::centered(int n, double a, cplx c) {
  GaussianState u;
  u.c = c;
  u.A = a * CMatrix::Identity(n, n);
  u.b = CVector::Zero(n);
  return u;
}

RVector GridFunction::node(std::size_t index) const {
  const std::vector<int> idx = unravel(axes, index);
  RVector x(n);
  for (int d = 0; d < n; ++d) x(d) = axes[d].node(idx[d]);
  return x;
}

double GridFunction::weight(std::size_t index) const {
  const std::vector<int> idx = unravel(axes, index);
  double w = 1.0;
  for (int d = 0; d < n; ++d) {
    const bool end = idx[d] == 0 || idx[d] == axes[d].points - 1;
    w *= axes[d].step() * (end ? 0.5 : 1.0);
  }
  return w;
}

GridFunction GridFunction::sample(int n, const Axis& axis, const std::function<cplx(const RVector&)>& f) {
  return sample(std::vector<Axis>(n, axis), f);
}

GridFunction GridFunction::sample(const std::vector<Axis>& axes, const std::function<cplx(const RVector&)>& f) {
  GridFunction g;
  g.n = static_cast<int>(axes.size());
  g.axes = axes;
  std::size_t total = 1;
  for (const Axis& a : axes) total *= static_cast<std::size_t>(a.points);
  g.samples.resize(total);
  for (std::size_t i = 0; i < total; ++i) g.samples[i] = f(g.node(i));
  return g;
}

GaussianState apply_kernel_gaussian(const GaussianKernel& k, const GaussianState& u) {
  if (u.n() != k.n) throw Error(ErrorCode::DimensionMismatch, kModule, "apply_kernel_gaussian", "");
  const int n = k.n;
  const CMatrix At = symmetrize(CMatrix(k.Kyy() + u.A));
  cplx root;
  try {
    root = sqrt_det_accretive(At);
  } catch (const Error&) {
    throw Error(ErrorCode::NonIntegrable, kModule, "apply_kernel_gaussian",
                "combined y-block has no positive-definite real part");
  }
  const auto lu = At.partialPivLu();
  const CMatrix AtInvKyx = lu.solve(k.Kyx());
  const CVector AtInvB = lu.solve(u.b);
  GaussianState out;
  out.A = symmetrize(CMatrix(k.Kxx() - k.Kxy() * AtInvKyx));
  out.b = -k.Kxy() * AtInvB;
  out.c = u.c * k.c * std::pow(2.0 * std::numbers::pi, 0.5 * n) / root *
          std::exp(0.5 * (u.b.transpose() * AtInvB)(0, 0));
  return out;
}

GridFunction apply_kernel_grid(const GaussianKernel& k, const GridFunction& u) {
  const GridPrep prep = prepare(k, u);
  GridFunction out = output_like(u);
  const long long N = static_cast<long long>(u.size());
#pragma omp parallel
  {
    std::vector<cplx> phi(prep.nodes.size());
#pragma omp for schedule(static)
    for (long long i = 0; i < N; ++i) {
      out.samples[i] = node_value(k, prep, prep.nodes[i], phi);
    }
  }
  return out;
}

GridFunction apply_kernel_grid_serial(const GaussianKernel& k, const GridFunction& u) {
  const GridPrep prep = prepare(k, u);
  GridFunction out = output_like(u);
  std::vector<cplx> phi(prep.nodes.size());
  for (std::size_t i = 0; i < u.size(); ++i) out.samples[i] = node_value(k, prep, prep.nodes[i], phi);
  return out;
}

double lp_norm(const GridFunction& u, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (const cplx& v : u.samples) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u.weight(i) * std::pow(std::abs(u.samples[i]), p);
  return std::pow(s, 1.0 / p);
}

double lp_norm(const GaussianState& u, double p) {
  const int n = u.n();
  const RMatrix Ar = symmetrize(RMatrix(u.A.real()));
  const RVector br = u.b.real();
  const double quad = br.dot(Ar.ldlt().solve(br));
  if (std::isinf(p)) return std::abs(u.c) * std::exp(0.5 * quad);
  const double log_int = p * std::log(std::abs(u.c)) + 0.5 * n * std::log(2.0 * std::numbers::pi / p) -
                         0.5 * log_det_spd(Ar) + 0.5 * p * quad;
  return std::exp(log_int / p);
}

double op_norm_1_inf(const GaussianKernel& k) {
  const PsdResult psd = psd_check(RMatrix(k.K.real()), 1e-9 * std::max(1.0, k.K.norm()));
  if (!psd.psd) {
    throw Error(ErrorCode::NonIntegrable, kModule, "op_norm_1_inf",
                "Re K is not positive semidefinite: " + std::to_string(psd.lambda_min));
  }
  return std::abs(k.c);
}

double young_exponent(double p, double q) {
  const double inv_r = 1.0 - inv_or_zero(p) + inv_or_zero(q);
  return inv_r <= 0.0 ? kInf : 1.0 / inv_r;
}

double compute_cpq(double p, double q, int n, int k0) {
  if (p < 1.0 || q < 1.0 || p > q) {
    throw Error(ErrorCode::ExponentOrder, kModule, "compute_cpq", "require 1 <= p <= q <= inf");
  }
  const double r = young_exponent(p, q);
  if (r <= 2.0) return n * (2.0 * k0 + r - 1.0) / (2.0 * r);
  if (std::isinf(r)) return n * (2.0 * k0 + 1.0) / 2.0;
  return n * (2.0 * k0 + 1.0) * (r - 1.0) / (2.0 * r);
}

ExponentFit fit_exponent(const std::vector<double>& t_values, const std::vector<double>& norms) {
  if (t_values.size() != norms.size() || t_values.size() < 3) {
    throw Error(ErrorCode::NonPositiveSample, kModule, "fit_exponent", "need at least 3 paired samples");
  }
  const std::size_t m = t_values.size();
  RMatrix X(m, 2);
  RVector y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(t_values[i] > 0.0) || !(norms[i] > 0.0)) {
      throw Error(ErrorCode::NonPositiveSample, kModule, "fit_exponent", "sample " + std::to_string(i));
    }
    X(i, 0) = std::log(t_values[i]);
    X(i, 1) = 1.0;
    y(i) = std::log(norms[i]);
  }
  const RVector beta = X.colPivHouseholderQr().solve(y);
  const RVector resid = y - X * beta;
  const double ss_tot = (y.array() - y.mean()).square().sum();
  ExponentFit fit;
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.r2 = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  return fit;
}

double gaussian_norm_lower_bound(const GaussianKernel& k, double p, double q) {
  auto ratio = [&](double loga) {
    const GaussianState u = GaussianState::centered(k.n, std::exp(loga));
    return lp_norm(apply_kernel_gaussian(k, u), q) / lp_norm(u, p);
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -12.0, hi = 12.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = ratio(x1), f2 = ratio(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = ratio(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = ratio(x1);
    }
  }
  return std::max({f1, f2, ratio(-12.0), ratio(12.0)});
}

DerivativeGrowth derivative_growth_check(const GaussianKernel& k, const RMatrix& G, const GaussianState& u,
                                         int m_max, double eps) {
  const int n = k.n;
  if (n > 2) throw Error(ErrorCode::DimensionMismatch, kModule, "derivative_growth_check", "n <= 2 supported");
  const GaussianState v = apply_kernel_gaussian(k, u);
  const double unorm = lp_norm(u, kInf);

  const RMatrix Ar = symmetrize(RMatrix(v.A.real()));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(Ar, Eigen::EigenvaluesOnly);
  const double sigma = 1.0 / std::sqrt(es.eigenvalues()(0));
  const RVector center = Ar.ldlt().solve(RVector(v.b.real()));
  const double radius = (6.0 + 2.0 * std::sqrt(static_cast<double>(m_max))) * sigma;
  const int pts = n == 1 ? 801 : 161;
  std::vector<RVector> nodes;
  if (n == 1) {
    for (int i = 0; i < pts; ++i) nodes.push_back(RVector::Constant(1, center(0) - radius + 2.0 * radius * i / (pts - 1)));
  } else {
    for (int i = 0; i < pts; ++i) {
      for (int j = 0; j < pts; ++j) {
        RVector x(2);
        x << center(0) - radius + 2.0 * radius * i / (pts - 1), center(1) - radius + 2.0 * radius * j / (pts - 1);
        nodes.push_back(x);
      }
    }
  }
  std::vector<double> weight_base(nodes.size()), gauss(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const RVector& x = nodes[i];
    weight_base[i] = std::sqrt(1.0 + (G * x).squaredNorm()) + std::sqrt(1.0 + (G.transpose() * x).squaredNorm());
    gauss[i] = std::abs(v(x));
  }

  // Polynomials P_alpha with d^alpha v = P_alpha e^phi, indexed by alpha = (m - j, j) for n = 2.
  std::vector<Poly> level{Poly{{{0, 0}, cplx(1.0)}}};
  DerivativeGrowth out;
  std::vector<double> ms, logs;
  double mfact = 1.0;
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) {
      mfact *= m;
      std::vector<Poly> next;
      if (n == 1) {
        next.push_back(differentiate(level[0], 0, v.A, v.b));
      } else {
        for (int j = 0; j <= m; ++j) {
          next.push_back(j < m ? differentiate(level[j], 0, v.A, v.b) : differentiate(level[j - 1], 1, v.A, v.b));
        }
      }
      level = std::move(next);
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < level.size(); ++j) {
        const double mult = n == 1 ? 1.0 : binomial(m, static_cast<int>(j));
        s += mult * std::abs(eval_poly(level[j], nodes[i]));
      }
      s *= gauss[i] * std::pow(weight_base[i], -m);
      sup = std::max(sup, s);
    }
    const double ratio = sup / (std::pow(eps, -0.5 * m) * std::sqrt(mfact) * unorm);
    out.ratios.push_back(ratio);
    out.C = std::max(out.C, std::pow(ratio, 1.0 / (1.0 + m)));
    ms.push_back(m);
    logs.push_back(std::log(ratio));
  }
  RMatrix X(ms.size(), 2);
  RVector y(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    X(i, 0) = ms[i];
    X(i, 1) = 1.0;
    y(i) = logs[i];
  }
  const RVector beta = X.colPivHouseholderQr().solve(y);
  const double ss_tot = (y.array() - y.mean()).square().sum();
  out.log_slope = beta(0);
  out.r2 = ss_tot > 0.0 ? 1.0 - (y - X * beta).squaredNorm() / ss_tot : 1.0;
  return out;
}

GaussianKernel twisted_dispersion_kernel(const RMatrix& N, double eps, const RMatrix& D) {
  return kernel_right_multiplier(twisted_kernel(N, eps), 0.5 * kI * to_complex(D));
}

double twisted_dispersion_constant(double eps, const RMatrix& D, double rr) {
  const int n = static_cast<int>(D.rows());
  const RMatrix S = eps * eps * RMatrix::Identity(n, n) + D * D;
  const double ld = log_det_spd(S);
  double logc = -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.25 * ld;
  if (!std::isinf(rr)) {
    logc += n / (2.0 * rr) * std::log(2.0 * std::numbers::pi / (eps * rr)) + ld / (2.0 * rr);
  }
  return std::exp(logc);
}

MiraculousReport miraculous_bound_check(const RMatrix& N, double eps, const RMatrix& D, const GridFunction& u) {
  const int n = static_cast<int>(N.rows());
  const GridFunction lhs = apply_kernel_grid(twisted_dispersion_kernel(N, eps, D), u);
  const RMatrix S = eps * eps * RMatrix::Identity(n, n) + D * D;
  const RMatrix R = S.inverse();
  MiraculousReport rep;
  rep.prefactor = twisted_dispersion_constant(eps, D, kInf);
  const RMatrix shift = RMatrix::Identity(n, n) - D * N;
  const long long total = static_cast<long long>(u.size());
  std::vector<double> absu(u.size()), w(u.size());
  std::vector<RVector> nodes(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    absu[j] = std::abs(u.samples[j]);
    w[j] = u.weight(j);
    nodes[j] = u.node(j);
  }
  std::vector<double> rhs(u.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < total; ++i) {
    const RVector z = shift * nodes[i];
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (absu[j] == 0.0) continue;
      const RVector d = z - nodes[j];
      s += w[j] * absu[j] * std::exp(-0.5 * eps * d.dot(R * d));
    }
    rhs[i] = rep.prefactor * s;
  }
  rep.max_violation = -kInf;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double l = std::abs(lhs.samples[i]);
    rep.lhs_max = std::max(rep.lhs_max, l);
    rep.rhs_max = std::max(rep.rhs_max, rhs[i]);
    rep.max_violation = std::max(rep.max_violation, l - rhs[i]);
  }
  return rep;
}

CounterexampleReport counterexample_demo(const QuadraticForm& q, double t) {
  const double tol = default_tol();
  const SingularSpaceReport rep = singular_space(q, tol);
  if (graph_condition(rep, tol)) {
    throw Error(ErrorCode::FixtureHasGraph, kModule, "counterexample_demo",
                "the graph condition holds, the semigroup smooths");
  }
  const int n = q.n;
  if (q.Q.bottomRows(n).norm() > 0.0) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "counterexample_demo",
                "only symbols depending on x alone are evolved (multiplication operators)");
  }
  CounterexampleReport out;
  out.t = t;
  try {
    kernel(q, t);
  } catch (const Error& e) {
    out.kernel_refused = e.code() == ErrorCode::NonIntegrableSymbol;
    out.kernel_error = to_string(e.code());
  }
  const CMatrix Qxx = q.Q.topLeftCorner(n, n);
  auto input = [n](const RVector& x) {
    const double xn = std::abs(x(n - 1));
    if (!(xn < 0.5) || xn == 0.0) return 0.0;
    const double l = std::log(xn);
    return std::exp(-0.5 * x.head(n - 1).squaredNorm()) / (l * l);
  };
  auto output = [&](const RVector& x) {
    const CVector xc = x.cast<cplx>();
    return std::exp(-t * (xc.transpose() * Qxx * xc)(0, 0)) * input(x);
  };
  RVector x0 = RVector::Zero(n);
  x0(n - 1) = 0.5;
  const double delta = 1e-9;
  RVector xl = x0, xr = x0;
  xl(n - 1) -= delta;
  xr(n - 1) += delta;
  out.input_jump = input(xl) - input(xr);
  out.output_jump = std::abs(output(xl) - output(xr));
  const CVector x0c = x0.cast<cplx>();
  out.predicted_jump = std::abs(std::exp(-t * (x0c.transpose() * Qxx * x0c)(0, 0))) * out.input_jump;
  out.jump_preserved =
      std::abs(out.output_jump - out.predicted_jump) <= 1e-3 && out.output_jump >= 0.5 * out.input_jump;

  const int pts = 2001;
  double prev = 0.0;
  for (int i = 0; i < pts; ++i) {
    RVector x = RVector::Zero(n);
    x(n - 1) = -1.0 + 2.0 * i / (pts - 1);
    const double val = std::abs(output(x));
    if (i > 0) out.grid_jump = std::max(out.grid_jump, std::abs(val - prev));
    prev = val;
  }
  return out;
}

}  // namespace qsemi
