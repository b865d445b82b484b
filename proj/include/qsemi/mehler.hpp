#pragma once

#include "qsemi/quadform.hpp"

namespace qsemi {

// e^{-t q^w} = c (e^{-m})^w with m(X) = MX.X
struct MehlerSymbol {
  cplx c{1.0, 0.0};
  CMatrix M;
  double t = 0.0;
};

// g(x, y) = c exp(-K(x,y).(x,y) / 2) on the stacked variable (x, y).
struct GaussianKernel {
  int n = 0;
  cplx c{1.0, 0.0};
  CMatrix K;

  CMatrix Kxx() const { return K.topLeftCorner(n, n); }
  CMatrix Kxy() const { return K.topRightCorner(n, n); }
  CMatrix Kyx() const { return K.bottomLeftCorner(n, n); }
  CMatrix Kyy() const { return K.bottomRightCorner(n, n); }
  cplx operator()(const RVector& x, const RVector& y) const;
};

struct KernelDiagnostics {
  RMatrix P;
  RMatrix V;
  RMatrix Mleft;
  RMatrix Nright;
};

struct MehlerInverse {
  RMatrix Rs;
  double prefactor = 1.0;  // sqrt det cos(s J Rs)
  int terms = 0;
};

MehlerSymbol mehler_symbol(const QuadraticForm& q, double t);
GaussianKernel kernel_from_symbol(const MehlerSymbol& sym);
GaussianKernel kernel(const QuadraticForm& q, double t);
GaussianKernel twisted_kernel(const RMatrix& N, double eps);
KernelDiagnostics diagnostics_PVMN(const MehlerSymbol& sym);
GaussianKernel compose_kernels(const GaussianKernel& k1, const GaussianKernel& k2);

// Matrix of |xi - N x|^2.
RMatrix twisted_form_matrix(const RMatrix& N);
MehlerInverse mehler_inverse_twisted(const RMatrix& N, double s);

// Composition of a kernel with elementary operators.
// left phase:  e^{(i/2)Vx.x} o k
// right phase: k o e^{(i/2)Vx.x}
// right multiplier: k o e^{C grad.grad}
// right flow: k o e^{t Mx.grad}
GaussianKernel kernel_left_phase(const GaussianKernel& k, const CMatrix& V);
GaussianKernel kernel_right_phase(const GaussianKernel& k, const CMatrix& V);
GaussianKernel kernel_right_multiplier(const GaussianKernel& k, const CMatrix& C);
GaussianKernel kernel_right_flow(const GaussianKernel& k, const RMatrix& M, double t);

// max(relative prefactor error, relative Frobenius error of K)
double kernel_distance(const GaussianKernel& a, const GaussianKernel& b);

}  // namespace qsemi
