#include "qsemi/quadform.hpp"

#include <string>

#include "qsemi/error.hpp"
#include "qsemi/matfun.hpp"

namespace qsemi {

namespace {
constexpr const char* kModule = "quadform";
}

QuadraticForm QuadraticForm::from_matrix(const CMatrix& Q, double tol) {
  if (Q.rows() != Q.cols()) throw Error(ErrorCode::NonSquare, kModule, "from_matrix", "");
  if (Q.rows() == 0 || Q.rows() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "from_matrix", "size must be 2n with n >= 1");
  }
  if (!Q.allFinite()) throw Error(ErrorCode::NonFinite, kModule, "from_matrix", "");
  QuadraticForm q;
  q.n = static_cast<int>(Q.rows() / 2);
  const double asym = (Q - Q.transpose()).norm();
  q.symmetrized = asym > 1e-12 * std::max(1.0, Q.norm());
  q.Q = symmetrize(Q);
  const PsdResult re = psd_check(RMatrix(q.Q.real()), tol * std::max(1.0, op_norm(q.Q)));
  if (!re.psd) {
    throw Error(ErrorCode::NotAccretive, kModule, "from_matrix",
                "lambda_min(Re Q) = " + std::to_string(re.lambda_min));
  }
  return q;
}

QuadraticForm QuadraticForm::from_matrix(const CMatrix& Q) { return from_matrix(Q, default_tol()); }

CMatrix standard_J(int n) {
  CMatrix J = CMatrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -CMatrix::Identity(n, n);
  return J;
}

CMatrix hamilton_map(const QuadraticForm& q) { return standard_J(q.n) * q.Q; }

cplx evaluate(const QuadraticForm& q, const CVector& X) {
  if (X.size() != 2 * q.n) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "evaluate",
                "expected " + std::to_string(2 * q.n) + ", got " + std::to_string(X.size()));
  }
  return (X.transpose() * q.Q * X)(0, 0);
}

QuadraticForm conjugate_by_linear(const QuadraticForm& q, const RMatrix& T) {
  if (T.rows() != 2 * q.n || T.cols() != 2 * q.n) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "conjugate_by_linear", "");
  }
  Eigen::FullPivLU<RMatrix> lu(T);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularTransform, kModule, "conjugate_by_linear", "");
  const CMatrix Tc = to_complex(T);
  QuadraticForm out;
  out.n = q.n;
  out.Q = symmetrize(CMatrix(Tc.transpose() * q.Q * Tc));
  return out;
}

BlockForm block_decompose(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch, kModule, "block_decompose", "");
  }
  const Eigen::Index n = m.rows() / 2;
  BlockForm b;
  b.R = 2.0 * m.topLeftCorner(n, n);
  b.L = 2.0 * m.bottomLeftCorner(n, n);
  b.B = 2.0 * m.bottomRightCorner(n, n);
  return b;
}

CMatrix block_assemble(const BlockForm& b) {
  const Eigen::Index n = b.R.rows();
  CMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = 0.5 * b.R;
  m.topRightCorner(n, n) = 0.5 * b.L.transpose();
  m.bottomLeftCorner(n, n) = 0.5 * b.L;
  m.bottomRightCorner(n, n) = 0.5 * b.B;
  return m;
}

RMatrix shear(const RMatrix& G) {
  const Eigen::Index n = G.rows();
  RMatrix T = RMatrix::Identity(2 * n, 2 * n);
  T.bottomLeftCorner(n, n) = G;
  return T;
}

}  // namespace qsemi
