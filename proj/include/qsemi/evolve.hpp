#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "qsemi/mehler.hpp"

namespace qsemi {

// u(x) = c exp(-Ax.x/2 + b.x)
struct GaussianState {
  cplx c{1.0, 0.0};
  CMatrix A;
  CVector b;

  int n() const { return static_cast<int>(A.rows()); }
  cplx operator()(const RVector& x) const;
  static GaussianState centered(int n, double a, cplx c = 1.0);
};

struct Axis {
  double min = -8.0;
  double max = 8.0;
  int points = 128;
  double step() const { return (max - min) / (points - 1); }
  double node(int i) const { return min + i * step(); }
};

struct GridFunction {
  int n = 0;
  std::vector<Axis> axes;
  std::vector<cplx> samples;  // last axis fastest

  std::size_t size() const { return samples.size(); }
  RVector node(std::size_t index) const;
  double weight(std::size_t index) const;  // tensor trapezoid weight

  static GridFunction sample(int n, const Axis& axis, const std::function<cplx(const RVector&)>& f);
  static GridFunction sample(const std::vector<Axis>& axes, const std::function<cplx(const RVector&)>& f);
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct NormFitReport {
  double p = 1.0;
  double q = std::numeric_limits<double>::infinity();
  double r = 0.0;
  double cpq = 0.0;
  std::vector<double> t_values;
  std::vector<double> norms;
  double fitted_slope = 0.0;
  double r2 = 0.0;
};

struct DerivativeGrowth {
  std::vector<double> ratios;  // m = 0..m_max
  double C = 0.0;              // max_m ratio_m^{1/(1+m)}
  double log_slope = 0.0;      // fitted slope of log ratio_m against m
  double r2 = 0.0;
};

struct MiraculousReport {
  double max_violation = 0.0;
  double lhs_max = 0.0;
  double rhs_max = 0.0;
  double prefactor = 0.0;  // (2 pi)^{-n/2} det(eps^2 I + D^2)^{-1/4}
};

struct CounterexampleReport {
  bool kernel_refused = false;
  std::string kernel_error;
  double t = 0.0;
  double input_jump = 0.0;
  double output_jump = 0.0;
  double predicted_jump = 0.0;
  bool jump_preserved = false;
  double grid_jump = 0.0;  // largest adjacent-node jump of the sampled output
};

GaussianState apply_kernel_gaussian(const GaussianKernel& k, const GaussianState& u);
GridFunction apply_kernel_grid(const GaussianKernel& k, const GridFunction& u);
GridFunction apply_kernel_grid_serial(const GaussianKernel& k, const GridFunction& u);

double lp_norm(const GridFunction& u, double p);
double lp_norm(const GaussianState& u, double p);
double op_norm_1_inf(const GaussianKernel& k);
double compute_cpq(double p, double q, int n, int k0);
double young_exponent(double p, double q);
ExponentFit fit_exponent(const std::vector<double>& t_values, const std::vector<double>& norms);

// sup over centered isotropic Gaussians of |Ku|_q / |u|_p
double gaussian_norm_lower_bound(const GaussianKernel& k, double p, double q);

DerivativeGrowth derivative_growth_check(const GaussianKernel& k, const RMatrix& G, const GaussianState& u,
                                         int m_max, double eps);

// Kernel of (e^{-(eps/2)|xi - Nx|^2})^w e^{(i/2)D grad.grad}
GaussianKernel twisted_dispersion_kernel(const RMatrix& N, double eps, const RMatrix& D);
// (2pi)^{-n/2} det(eps^2+D^2)^{-1/4} |e^{-(eps/2) r}|_r, with r = (eps^2 + D^2)^{-1} and Young exponent rr.
double twisted_dispersion_constant(double eps, const RMatrix& D, double rr);
MiraculousReport miraculous_bound_check(const RMatrix& N, double eps, const RMatrix& D, const GridFunction& u);

CounterexampleReport counterexample_demo(const QuadraticForm& q, double t);

}  // namespace qsemi
