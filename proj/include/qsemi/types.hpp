#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qsemi {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-9;

inline CMatrix to_complex(const RMatrix& m) { return m.cast<cplx>(); }

}  // namespace qsemi
