#pragma once

#include <string>
#include <vector>

#include "qsemi/mehler.hpp"
#include "qsemi/singular.hpp"

namespace qsemi {

// e^{-t q^w} = e^{-t a^w} e^{-i t b^w}
struct PolarFactors {
  double t = 0.0;
  RMatrix A;
  RMatrix B;
  double imag_A = 0.0;
  double imag_B = 0.0;
  double reconstruction_residual = 0.0;
};

// e^{-itb^w} = e^{(t/2) tr M} e^{itD grad.grad} e^{tMx.grad} e^{(i/2)tWx.x}
struct UnitaryFactors {
  RMatrix D;
  RMatrix M;
  RMatrix W;
  int iterations = 0;
  double residual = 0.0;
};

struct StrangResult {
  RMatrix P;
  double reconstruction_residual = 0.0;
  bool positivity_checked = false;
  double positivity_margin = 0.0;  // lambda_min(P - A/2)
};

struct TGrid {
  double t_min = 1e-3;
  double t_max = 0.1;
  int points = 20;
  bool log_spaced = true;
  std::vector<double> values() const;
};

struct GammaSelection {
  double gamma = 0.0;
  double t0 = 0.0;
  int alpha = 1;
  std::vector<double> t_values;
  std::vector<double> gamma_t;
};

struct DecompositionFactors {
  QuadraticForm q;
  double t = 0.0;
  SingularSpaceReport report;
  GraphCertificate cert;
  double gamma = 0.0;
  int alpha = 1;
  double s = 0.0;  // gamma t^alpha
  double c_t = 1.0;
  PolarFactors polar;
  RMatrix Pt;
  UnitaryFactors unitary;
  MehlerInverse inverse;
  StrangResult strang;
  double t0 = 0.0;
};

struct VerificationResult {
  double matrix_residual = 0.0;
  double kernel_residual = 0.0;
};

inline constexpr double kStrangRadius = 0.11552453009332421;  // log(2)/6

// Matrix attached to e^{-p^w}: exp(-2iJP).
CMatrix weyl_exp_matrix(const CMatrix& P);

PolarFactors polar_factors(const QuadraticForm& q, double t, double tol);
UnitaryFactors unitary_factorization(const RMatrix& B, double t);
CMatrix unitary_product(const UnitaryFactors& u, double t);
StrangResult strang_middle(const RMatrix& A, const RMatrix& B, double eps2 = 0.05, double tol = 1e-10);
GammaSelection select_gamma(const QuadraticForm& q, const SingularSpaceReport& report,
                            const GraphCertificate& cert, const TGrid& grid, double tol);
DecompositionFactors build_decomposition(const QuadraticForm& q, double t, const TGrid& grid, double tol);
DecompositionFactors build_decomposition(const QuadraticForm& q, double t);
VerificationResult verify_decomposition(const DecompositionFactors& f, double tol);

}  // namespace qsemi
