#include "qsemi/fixtures.hpp"

#include "qsemi/error.hpp"

namespace qsemi::fixtures {

QuadraticForm heat(int n) {
  CMatrix Q = CMatrix::Zero(2 * n, 2 * n);
  Q.bottomRightCorner(n, n).setIdentity();
  return QuadraticForm::from_matrix(Q);
}

QuadraticForm harmonic(int n) { return QuadraticForm::from_matrix(0.5 * CMatrix::Identity(2 * n, 2 * n)); }

QuadraticForm kolmogorov() {
  CMatrix Q = CMatrix::Zero(4, 4);
  Q(3, 3) = 1.0;
  Q(1, 2) = Q(2, 1) = cplx(0.0, 0.5);
  return QuadraticForm::from_matrix(Q);
}

QuadraticForm fokker_planck() {
  CMatrix Q = CMatrix::Zero(4, 4);
  Q(3, 3) = 1.0;
  Q(1, 1) = 0.25;
  Q(1, 2) = Q(2, 1) = cplx(0.0, 0.5);
  return QuadraticForm::from_matrix(Q);
}

QuadraticForm shifted_diagonal() {
  CMatrix Q(2, 2);
  Q << 1.0, -1.0, -1.0, 1.0;
  return QuadraticForm::from_matrix(Q);
}

QuadraticForm x_squared() {
  CMatrix Q = CMatrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  return QuadraticForm::from_matrix(Q);
}

QuadraticForm by_name(const std::string& name, int n) {
  if (name == "heat") return heat(n);
  if (name == "harmonic") return harmonic(n);
  if (name == "kolmogorov") return kolmogorov();
  if (name == "fokker-planck") return fokker_planck();
  if (name == "shifted-diagonal") return shifted_diagonal();
  if (name == "x-squared") return x_squared();
  throw Error(ErrorCode::ParseError, "fixtures", "by_name", "unknown fixture '" + name + "'");
}

std::vector<std::string> names() {
  return {"heat", "harmonic", "kolmogorov", "fokker-planck", "shifted-diagonal", "x-squared"};
}

}  // namespace qsemi::fixtures
