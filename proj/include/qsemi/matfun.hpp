#pragma once

#include "qsemi/types.hpp"

namespace qsemi {

// Default tolerance; QSEMI_TOL in the environment overrides it.
double default_tol();

CMatrix mat_exp(const CMatrix& A);
CMatrix mat_log_principal(const CMatrix& A);
CMatrix mat_cos(const CMatrix& A);
CMatrix mat_sin(const CMatrix& A);
CMatrix mat_tan(const CMatrix& A);
CMatrix mat_arctan(const CMatrix& A);

struct BranchTrackedScalar {
  cplx value{1.0, 0.0};
  double path_parameter = 0.0;
  int steps_used = 0;
};

// Continuous branch of s -> sqrt(det cos(s J Q)) on [0, t], starting at 1.
BranchTrackedScalar sqrt_det_cos_tracked(const CMatrix& Q, double t, int steps = 16);

// Orthonormal basis of the numerical kernel (columns).
CMatrix null_space(const CMatrix& A, double tol);
RMatrix null_space(const RMatrix& A, double tol);

struct PsdResult {
  bool psd = false;
  double lambda_min = 0.0;
};
PsdResult psd_check(const CMatrix& H, double tol);
PsdResult psd_check(const RMatrix& H, double tol);

// sqrt(det A) for complex symmetric A with Re A positive-definite, on the
// branch that is positive when A is real.
cplx sqrt_det_accretive(const CMatrix& A);

double op_norm(const CMatrix& A);
double op_norm(const RMatrix& A);

CMatrix symmetrize(const CMatrix& A);
RMatrix symmetrize(const RMatrix& A);

}  // namespace qsemi
