#pragma once

#include <limits>
#include <optional>
#include <string>

#include "qsemi/decompose.hpp"
#include "qsemi/report.hpp"

namespace qsemi::cli {

enum ExitCode : int { kOk = 0, kParse = 2, kMathDomain = 3, kVerificationFailed = 4 };

struct ProblemFile {
  int n = 0;
  std::string label;
  QuadraticForm q;
  std::optional<double> tol;
  std::optional<TGrid> t_grid;
};

struct Options {
  std::string command;
  std::optional<std::string> file;
  std::optional<std::string> fixture;
  int n = 1;
  double t = 0.05;
  std::optional<TGrid> t_grid;
  std::optional<double> tol;
  int grid_points = 128;
  double domain = 8.0;
  double p = 1.0;
  double q = std::numeric_limits<double>::infinity();
  double sigma = 1.0;
  std::optional<std::string> csv;
};

struct Result {
  int exit_code = kOk;
  report::json body;
  std::string csv;  // t-sweeps only
};

ProblemFile parse_problem(const report::json& j);
ProblemFile load_problem_file(const std::string& path);
// "t_min:t_max:points[:log|lin]"
TGrid parse_t_grid(const std::string& spec);
double parse_exponent(const std::string& s);

Result run(const Options& opt);

}  // namespace qsemi::cli
