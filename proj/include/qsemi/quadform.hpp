#pragma once

#include "qsemi/types.hpp"

namespace qsemi {

// q(X) = QX.X on R^{2n}, Q complex symmetric with Re Q positive semidefinite.
struct QuadraticForm {
  int n = 0;
  CMatrix Q;
  // Set when the input had to be symmetrized beyond 1e-12.
  bool symmetrized = false;

  static QuadraticForm from_matrix(const CMatrix& Q, double tol);
  static QuadraticForm from_matrix(const CMatrix& Q);
};

// m(x, xi) = r(x)/2 + Lx.xi + b(xi)/2.
struct BlockForm {
  CMatrix R;
  CMatrix L;
  CMatrix B;
};

CMatrix standard_J(int n);
CMatrix hamilton_map(const QuadraticForm& q);
cplx evaluate(const QuadraticForm& q, const CVector& X);
QuadraticForm conjugate_by_linear(const QuadraticForm& q, const RMatrix& T);
BlockForm block_decompose(const CMatrix& m);
CMatrix block_assemble(const BlockForm& b);

// (x, xi) -> (x, xi + G x)
RMatrix shear(const RMatrix& G);

}  // namespace qsemi
