#include "qsemi/singular.hpp"

#include <algorithm>

#include <Eigen/QR>
#include <Eigen/SVD>


namespace qsemi {

namespace {

int rank_with_threshold(const RMatrix& A, double threshold) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<RMatrix> svd(A);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) >= threshold) ++r;
  }
  return r;
}

}  // namespace

SingularSpaceReport singular_space(const QuadraticForm& q, double tol) {
  const int d = 2 * q.n;
  const RMatrix reQ = q.Q.real();
  const RMatrix imF = hamilton_map(q).imag();

  // One scale for the whole stack, so blocks that vanish up to noise stay small.
  const double scale = std::max(reQ.norm(), imF.norm());
  const RMatrix F = scale > 0.0 ? RMatrix(imF / scale) : imF;
  RMatrix stack(d * d, d);
  RMatrix power = RMatrix::Identity(d, d);
  for (int l = 0; l < d; ++l) {
    stack.middleRows(l * d, d) = scale > 0.0 ? RMatrix(reQ * power / scale) : RMatrix(reQ * power);
    power = power * F;
  }

  SingularSpaceReport rep;
  rep.n = q.n;
  rep.tol = tol;

  Eigen::JacobiSVD<RMatrix> svd(stack, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double threshold = smax < tol ? tol : tol * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) >= threshold) ++rank;
  }
  rep.basis = svd.matrixV().rightCols(d - rank);
  rep.dim = d - rank;
  if (rank > 0 && rank < sv.size()) rep.gap_ratio = sv(rank) / sv(rank - 1);

  rep.k0 = 0;
  bool found = false;
  for (int k = 0; k < d; ++k) {
    const int r = rank_with_threshold(stack.topRows((k + 1) * d), threshold);
    rep.stack_ranks.push_back(r);
    if (!found && r == rank) {
      rep.k0 = k;
      found = true;
    }
  }
  return rep;
}

std::optional<GraphCertificate> graph_condition(const SingularSpaceReport& report, double tol) {
  const int n = report.n;
  GraphCertificate cert;
  if (report.dim == 0) {
    cert.G = RMatrix::Zero(n, n);
  } else {
    const RMatrix X = report.basis.topRows(n);
    const RMatrix Xi = report.basis.bottomRows(n);
    if (rank_with_threshold(X, tol) < report.dim) return std::nullopt;
    Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(X);
    cod.setThreshold(tol);
    cert.G = Xi * cod.pseudoInverse();
  }
  cert.N = 0.5 * (cert.G - cert.G.transpose());
  cert.Gsym = 0.5 * (cert.G + cert.G.transpose());
  return cert;
}

double isotropic_cone_check(const RMatrix& a, const SingularSpaceReport& report) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < report.basis.cols(); ++j) {
    const RVector v = report.basis.col(j);
    worst = std::max(worst, std::abs(v.dot(a * v)));
  }
  return worst;
}

}  // namespace qsemi
