#pragma once

#include <optional>
#include <vector>

#include "qsemi/quadform.hpp"

namespace qsemi {

struct SingularSpaceReport {
  int n = 0;
  RMatrix basis;  // 2n x dim, orthonormal columns
  int k0 = 0;
  int dim = 0;
  double tol = 0.0;
  // sigma_{r+1} / sigma_r of the stacked matrix; 0 when there is no gap to report.
  double gap_ratio = 0.0;
  std::vector<int> stack_ranks;  // rank of the stack with l = 0..k
};

struct GraphCertificate {
  RMatrix G;
  RMatrix N;     // (G - G^T)/2
  RMatrix Gsym;  // (G + G^T)/2
};

SingularSpaceReport singular_space(const QuadraticForm& q, double tol);
std::optional<GraphCertificate> graph_condition(const SingularSpaceReport& report, double tol);
double isotropic_cone_check(const RMatrix& a, const SingularSpaceReport& report);

}  // namespace qsemi
