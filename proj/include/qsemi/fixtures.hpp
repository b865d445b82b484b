#pragma once

#include <string>
#include <vector>

#include "qsemi/quadform.hpp"

namespace qsemi::fixtures {

QuadraticForm heat(int n = 1);
QuadraticForm harmonic(int n = 1);
// q = eta^2 + i v xi on (x, v, xi, eta).
QuadraticForm kolmogorov();
// q = eta^2 + v^2/4 + i v xi on (x, v, xi, eta).
QuadraticForm fokker_planck();
// q = (xi - x)^2
QuadraticForm shifted_diagonal();
// q = x^2
QuadraticForm x_squared();

QuadraticForm by_name(const std::string& name, int n = 1);
std::vector<std::string> names();

}  // namespace qsemi::fixtures
