#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsemi/cli.hpp"
#include "qsemi/error.hpp"

int main(int argc, char** argv) {
  using namespace qsemi;
  CLI::App app{"Semigroups of accretive quadratic operators: analysis, Mehler kernels, decompositions"};
  app.require_subcommand(1, 1);

  cli::Options opt;
  std::string file, fixture, t_grid, out, csv, p = "1", q = "inf";
  double tol = 0.0;

  const char* commands[] = {"analyze", "mehler", "kernel", "decompose", "verify", "evolve", "norms", "exponents"};
  for (const char* name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("file", file, "problem file (JSON)");
    sub->add_option("--fixture", fixture, "built-in fixture: heat, harmonic, kolmogorov, fokker-planck, "
                                          "shifted-diagonal, x-squared");
    sub->add_option("--n", opt.n, "dimension for the heat and harmonic fixtures");
    sub->add_option("--t", opt.t, "time");
    sub->add_option("--t-grid", t_grid, "t_min:t_max:points[:log|lin]");
    sub->add_option("--tol", tol, "tolerance (overrides QSEMI_TOL and the problem file)");
    sub->add_option("--grid-points", opt.grid_points, "grid points per axis");
    sub->add_option("--domain", opt.domain, "grid half-width");
    sub->add_option("--sigma", opt.sigma, "width of the Gaussian input");
    sub->add_option("--p", p, "source exponent");
    sub->add_option("--q", q, "target exponent");
    sub->add_option("--out", out, "write the JSON report here instead of stdout");
    sub->add_option("--csv", csv, "write the t-sweep as CSV (exponents)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kParse;
  }

  opt.command = app.get_subcommands().front()->get_name();
  if (!file.empty()) opt.file = file;
  if (!fixture.empty()) opt.fixture = fixture;
  if (tol > 0.0) opt.tol = tol;
  cli::Result res;
  try {
    if (!t_grid.empty()) opt.t_grid = cli::parse_t_grid(t_grid);
    opt.p = cli::parse_exponent(p);
    opt.q = cli::parse_exponent(q);
    res = cli::run(opt);
  } catch (const Error& e) {
    res = {cli::kParse, report::json{{"error", {{"code", to_string(e.code())}, {"module", e.module()},
                                                {"operation", e.operation()}, {"detail", e.detail()}}}},
           {}};
  }

  const std::string text = report::dump(res.body);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out) << text;
  }
  if (!csv.empty() && !res.csv.empty()) std::ofstream(csv) << res.csv;
  if (res.body.contains("error")) std::cerr << res.body["error"]["module"].get<std::string>() << "::"
                                            << res.body["error"]["operation"].get<std::string>() << ": "
                                            << res.body["error"]["code"].get<std::string>() << "\n";
  return res.exit_code;
}
