#pragma once

#include <string>

#include <json.hpp>

#include "qsemi/types.hpp"

namespace qsemi::report {

using json = nlohmann::json;

// Sorted keys, two-space indent, doubles as %.17g, non-finite doubles as strings.
std::string dump(const json& j);

json real_matrix(const RMatrix& m);
json complex_matrix(const CMatrix& m);
json complex_scalar(cplx z);
json number(double x);

}  // namespace qsemi::report
