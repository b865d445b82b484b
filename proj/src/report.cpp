#include "qsemi/report.hpp"

#include <cmath>
#include <cstdio>

namespace qsemi::report {

namespace {

void write_string(std::string& out, const std::string& s) {
  out += json(s).dump(-1, ' ', false, json::error_handler_t::replace);
}

void write_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    write_string(out, std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void write(std::string& out, const json& j, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        write_string(out, it.key());
        out += ": ";
        write(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalar = true;
      for (const auto& e : j) scalar = scalar && !e.is_structured();
      if (scalar) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write(out, j[i], depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(out, j[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float:
      write_double(out, j.get<double>());
      return;
    case json::value_t::string:
      write_string(out, j.get<std::string>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump(const json& j) {
  std::string out;
  write(out, j, 0);
  out += "\n";
  return out;
}

json real_matrix(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json complex_matrix(const CMatrix& m) {
  return json{{"re", real_matrix(m.real())}, {"im", real_matrix(m.imag())}};
}

json complex_scalar(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json number(double x) { return json(x); }

}  // namespace qsemi::report
