#include "qsemi/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qsemi/error.hpp"
#include "qsemi/evolve.hpp"
#include "qsemi/fixtures.hpp"
#include "qsemi/matfun.hpp"

namespace qsemi::cli {

namespace {

using report::json;
constexpr const char* kModule = "cli";

[[noreturn]] void parse_fail(const std::string& op, const std::string& detail) {
  throw Error(ErrorCode::ParseError, kModule, op, detail);
}

RMatrix parse_matrix(const json& j, int d, const char* name) {
  RMatrix m(d, d);
  if (!j.is_array()) parse_fail("parse_problem", std::string(name) + " must be an array");
  if (j.size() == static_cast<std::size_t>(d) * d && (j.empty() || j[0].is_number())) {
    for (int i = 0; i < d * d; ++i) {
      if (!j[i].is_number()) parse_fail("parse_problem", std::string(name) + " has a non-numeric entry");
      m(i / d, i % d) = j[i].get<double>();
    }
    return m;
  }
  if (j.size() != static_cast<std::size_t>(d)) {
    parse_fail("parse_problem", std::string(name) + " must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  for (int i = 0; i < d; ++i) {
    if (!j[i].is_array() || j[i].size() != static_cast<std::size_t>(d)) {
      parse_fail("parse_problem", std::string(name) + " row " + std::to_string(i) + " has the wrong length");
    }
    for (int k = 0; k < d; ++k) {
      if (!j[i][k].is_number()) parse_fail("parse_problem", std::string(name) + " has a non-numeric entry");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

std::string format_matrix(const RMatrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      char buf[32];
      const double v = std::abs(m(i, k)) < 1e-12 ? 0.0 : m(i, k);
      std::snprintf(buf, sizeof buf, "%.6g", v);
      s += (k ? ", " : "") + std::string(buf);
    }
    s += "]";
  }
  return s + "]";
}

json error_body(const Error& e) {
  return json{{"error",
               {{"code", to_string(e.code())},
                {"module", e.module()},
                {"operation", e.operation()},
                {"detail", e.detail()}}}};
}

struct Problem {
  std::string label;
  QuadraticForm q;
  double tol = kDefaultTol;
  TGrid grid;
};

Problem resolve(const Options& opt) {
  Problem pr;
  pr.tol = default_tol();
  if (opt.fixture) {
    pr.q = fixtures::by_name(*opt.fixture, opt.n);
    pr.label = *opt.fixture;
  } else if (opt.file) {
    ProblemFile pf = load_problem_file(*opt.file);
    pr.q = pf.q;
    pr.label = pf.label;
    if (pf.tol) pr.tol = *pf.tol;
    if (pf.t_grid) pr.grid = *pf.t_grid;
  } else {
    parse_fail("resolve", "give a problem file or --fixture");
  }
  if (opt.tol) pr.tol = *opt.tol;
  if (opt.t_grid) pr.grid = *opt.t_grid;
  return pr;
}

json header(const Problem& pr, const std::string& command) {
  return json{{"command", command}, {"label", pr.label}, {"n", pr.q.n}, {"tol", pr.tol},
              {"Q", report::complex_matrix(pr.q.Q)}};
}

json singular_json(const SingularSpaceReport& rep) {
  return json{{"basis", report::real_matrix(rep.basis)},
              {"dim", rep.dim},
              {"k0", rep.k0},
              {"gap_ratio", rep.gap_ratio},
              {"stack_ranks", rep.stack_ranks}};
}

json graph_json(const std::optional<GraphCertificate>& cert) {
  if (!cert) return nullptr;
  return json{{"G", report::real_matrix(cert->G)},
              {"N", report::real_matrix(cert->N)},
              {"Gsym", report::real_matrix(cert->Gsym)}};
}

json kernel_json(const GaussianKernel& k) {
  return json{{"c", report::complex_scalar(k.c)}, {"K", report::complex_matrix(k.K)}};
}

json gaussian_json(const GaussianState& u) {
  return json{{"c", report::complex_scalar(u.c)},
              {"A", report::complex_matrix(u.A)},
              {"b", report::complex_matrix(CMatrix(u.b))}};
}

Result cmd_analyze(const Problem& pr) {
  const SingularSpaceReport rep = singular_space(pr.q, pr.tol);
  const auto cert = graph_condition(rep, pr.tol);
  json body = header(pr, "analyze");
  body["singular"] = singular_json(rep);
  body["graph"] = graph_json(cert);
  body["smoothing"] = static_cast<bool>(cert);
  body["verdict"] = cert ? "graph condition holds, G=" + format_matrix(cert->G)
                         : std::string("fails: S ∩ ({0}×ℝⁿ) ≠ {0}");
  return {kOk, body, {}};
}

Result cmd_mehler(const Problem& pr, double t) {
  const MehlerSymbol sym = mehler_symbol(pr.q, t);
  json body = header(pr, "mehler");
  body["t"] = t;
  body["c"] = report::complex_scalar(sym.c);
  body["M"] = report::complex_matrix(sym.M);
  return {kOk, body, {}};
}

Result cmd_kernel(const Problem& pr, double t) {
  const MehlerSymbol sym = mehler_symbol(pr.q, t);
  const GaussianKernel k = kernel_from_symbol(sym);
  json body = header(pr, "kernel");
  body["t"] = t;
  body["kernel"] = kernel_json(k);
  try {
    const KernelDiagnostics d = diagnostics_PVMN(sym);
    body["diagnostics"] = json{{"P", report::real_matrix(d.P)},
                               {"V", report::real_matrix(d.V)},
                               {"Mleft", report::real_matrix(d.Mleft)},
                               {"Nright", report::real_matrix(d.Nright)}};
  } catch (const Error&) {
    body["diagnostics"] = nullptr;
  }
  return {kOk, body, {}};
}

json factors_json(const DecompositionFactors& f) {
  return json{{"t", f.t},
              {"t0", f.t0},
              {"G", report::real_matrix(f.cert.G)},
              {"N", report::real_matrix(f.cert.N)},
              {"Gsym", report::real_matrix(f.cert.Gsym)},
              {"gamma", f.gamma},
              {"alpha", f.alpha},
              {"s", f.s},
              {"c_t", f.c_t},
              {"A_t", report::real_matrix(f.polar.A)},
              {"B_t", report::real_matrix(f.polar.B)},
              {"P_t", report::real_matrix(f.Pt)},
              {"D_t", report::real_matrix(f.unitary.D)},
              {"M_t", report::real_matrix(f.unitary.M)},
              {"W_t", report::real_matrix(f.unitary.W)},
              {"R_s", report::real_matrix(f.inverse.Rs)},
              {"residuals",
               {{"polar", f.polar.reconstruction_residual},
                {"unitary", f.unitary.residual},
                {"strang", f.strang.reconstruction_residual},
                {"strang_positivity_margin", f.strang.positivity_margin}}}};
}

Result cmd_decompose(const Problem& pr, double t) {
  const DecompositionFactors f = build_decomposition(pr.q, t, pr.grid, pr.tol);
  json body = header(pr, "decompose");
  body["factors"] = factors_json(f);
  return {kOk, body, {}};
}

Result cmd_verify(const Problem& pr, double t) {
  const DecompositionFactors f = build_decomposition(pr.q, t, pr.grid, pr.tol);
  const VerificationResult v = verify_decomposition(f, pr.tol);
  const bool ok = v.matrix_residual < 1e-9 && v.kernel_residual < 1e-6;
  json body = header(pr, "verify");
  body["t"] = t;
  body["matrix_residual"] = v.matrix_residual;
  body["kernel_residual"] = v.kernel_residual;
  body["thresholds"] = json{{"matrix", 1e-9}, {"kernel", 1e-6}};
  body["passed"] = ok;
  return {ok ? kOk : kVerificationFailed, body, {}};
}

Result cmd_evolve(const Problem& pr, const Options& opt) {
  const int n = pr.q.n;
  const GaussianKernel k = kernel(pr.q, opt.t);
  const GaussianState u = GaussianState::centered(n, 1.0 / (opt.sigma * opt.sigma));
  const GaussianState v = apply_kernel_gaussian(k, u);
  json body = header(pr, "evolve");
  body["t"] = opt.t;
  body["input"] = gaussian_json(u);
  body["output"] = gaussian_json(v);
  json norms = json::object();
  for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()}) {
    const std::string key = std::isinf(p) ? "inf" : std::to_string(static_cast<int>(p));
    norms[key] = json{{"input", lp_norm(u, p)}, {"output", lp_norm(v, p)}};
  }
  body["norms"] = norms;
  if (n <= 2) {
    const Axis axis{-opt.domain, opt.domain, opt.grid_points};
    const GridFunction g = GridFunction::sample(n, axis, [&](const RVector& x) { return u(x); });
    const GridFunction out = apply_kernel_grid(k, g);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const cplx exact = v(out.node(i));
      err = std::max(err, std::abs(out.samples[i] - exact));
      ref = std::max(ref, std::abs(exact));
    }
    body["grid"] = json{{"points", opt.grid_points}, {"domain", opt.domain}, {"relative_error", err / ref}};
  }
  return {kOk, body, {}};
}

double norm_at(const QuadraticForm& q, double t, double p, double qq) {
  const GaussianKernel k = kernel(q, t);
  if (p == 1.0 && std::isinf(qq)) return op_norm_1_inf(k);
  return gaussian_norm_lower_bound(k, p, qq);
}

Result cmd_norms(const Problem& pr, const Options& opt) {
  const SingularSpaceReport rep = singular_space(pr.q, pr.tol);
  const bool exact = opt.p == 1.0 && std::isinf(opt.q);
  json body = header(pr, "norms");
  body["t"] = opt.t;
  body["p"] = opt.p;
  body["q"] = opt.q;
  body["norm"] = norm_at(pr.q, opt.t, opt.p, opt.q);
  body["method"] = exact ? "exact sup|g|" : "lower bound over centered Gaussians";
  body["r"] = young_exponent(opt.p, opt.q);
  body["cpq"] = compute_cpq(opt.p, opt.q, pr.q.n, rep.k0);
  return {kOk, body, {}};
}

Result cmd_exponents(const Problem& pr, const Options& opt) {
  const SingularSpaceReport rep = singular_space(pr.q, pr.tol);
  NormFitReport nf;
  nf.p = opt.p;
  nf.q = opt.q;
  nf.r = young_exponent(opt.p, opt.q);
  nf.cpq = compute_cpq(opt.p, opt.q, pr.q.n, rep.k0);
  nf.t_values = pr.grid.values();
  std::ostringstream csv;
  csv << "t,value\n";
  for (double t : nf.t_values) {
    nf.norms.push_back(norm_at(pr.q, t, opt.p, opt.q));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, nf.norms.back());
    csv << buf;
  }
  const ExponentFit fit = fit_exponent(nf.t_values, nf.norms);
  nf.fitted_slope = fit.slope;
  nf.r2 = fit.r2;
  const double bound = -nf.cpq;
  std::string verdict;
  if (std::abs(fit.slope - bound) <= 0.01) {
    verdict = "tight";
  } else if (fit.slope >= bound - 0.01) {
    verdict = "respected";
  } else {
    verdict = "violated";
  }
  json body = header(pr, "exponents");
  body["p"] = nf.p;
  body["q"] = nf.q;
  body["r"] = nf.r;
  body["k0"] = rep.k0;
  body["cpq"] = nf.cpq;
  body["bound"] = bound;
  body["slope"] = nf.fitted_slope;
  body["r2"] = nf.r2;
  body["t_values"] = nf.t_values;
  body["norms"] = nf.norms;
  body["verdict"] = verdict;
  return {verdict == "violated" ? kVerificationFailed : kOk, body, csv.str()};
}

}  // namespace

ProblemFile parse_problem(const json& j) {
  if (!j.is_object()) parse_fail("parse_problem", "top level must be an object");
  if (!j.contains("n") || !j["n"].is_number_integer() || j["n"].get<int>() < 1) {
    parse_fail("parse_problem", "n must be a positive integer");
  }
  ProblemFile pf;
  pf.n = j["n"].get<int>();
  const int d = 2 * pf.n;
  if (!j.contains("Q_re")) parse_fail("parse_problem", "missing Q_re");
  const RMatrix re = parse_matrix(j["Q_re"], d, "Q_re");
  const RMatrix im = j.contains("Q_im") ? parse_matrix(j["Q_im"], d, "Q_im") : RMatrix::Zero(d, d);
  const double asym = std::max((re - re.transpose()).cwiseAbs().maxCoeff(), (im - im.transpose()).cwiseAbs().maxCoeff());
  if (asym > 1e-9) parse_fail("parse_problem", "Q is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  if (j.contains("label")) {
    if (!j["label"].is_string()) parse_fail("parse_problem", "label must be a string");
    pf.label = j["label"].get<std::string>();
  }
  if (j.contains("tol")) {
    if (!j["tol"].is_number() || j["tol"].get<double>() <= 0.0) parse_fail("parse_problem", "tol must be positive");
    pf.tol = j["tol"].get<double>();
  }
  if (j.contains("t_grid")) {
    const json& g = j["t_grid"];
    TGrid grid;
    try {
      grid.t_min = g.at("t_min").get<double>();
      grid.t_max = g.at("t_max").get<double>();
      grid.points = g.at("points").get<int>();
      grid.log_spaced = g.value("log_spaced", true);
    } catch (const json::exception& e) {
      parse_fail("parse_problem", std::string("t_grid: ") + e.what());
    }
    if (!(grid.t_min > 0.0) || !(grid.t_max >= grid.t_min) || grid.points < 1) {
      parse_fail("parse_problem", "t_grid needs 0 < t_min <= t_max and points >= 1");
    }
    pf.t_grid = grid;
  }
  CMatrix Q(d, d);
  Q.real() = re;
  Q.imag() = im;
  try {
    pf.q = QuadraticForm::from_matrix(Q, pf.tol.value_or(default_tol()));
  } catch (const Error& e) {
    parse_fail("parse_problem", e.what());
  }
  return pf;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail("load_problem_file", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    parse_fail("load_problem_file", e.what());
  }
  return parse_problem(j);
}

TGrid parse_t_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 3 || parts.size() > 4) parse_fail("parse_t_grid", "expected t_min:t_max:points[:log|lin]");
  TGrid g;
  try {
    g.t_min = std::stod(parts[0]);
    g.t_max = std::stod(parts[1]);
    g.points = std::stoi(parts[2]);
  } catch (const std::exception&) {
    parse_fail("parse_t_grid", "non-numeric field in '" + spec + "'");
  }
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      g.log_spaced = true;
    } else if (parts[3] == "lin") {
      g.log_spaced = false;
    } else {
      parse_fail("parse_t_grid", "spacing must be log or lin");
    }
  }
  if (!(g.t_min > 0.0) || !(g.t_max >= g.t_min) || g.points < 1) {
    parse_fail("parse_t_grid", "need 0 < t_min <= t_max and points >= 1");
  }
  return g;
}

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || v < 1.0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail("parse_exponent", "exponent must be a number >= 1 or inf, got '" + s + "'");
  }
}

Result run(const Options& opt) {
  try {
    const Problem pr = resolve(opt);
    if (opt.command == "analyze") return cmd_analyze(pr);
    if (opt.command == "mehler") return cmd_mehler(pr, opt.t);
    if (opt.command == "kernel") return cmd_kernel(pr, opt.t);
    if (opt.command == "decompose") return cmd_decompose(pr, opt.t);
    if (opt.command == "verify") return cmd_verify(pr, opt.t);
    if (opt.command == "evolve") return cmd_evolve(pr, opt);
    if (opt.command == "norms") return cmd_norms(pr, opt);
    if (opt.command == "exponents") return cmd_exponents(pr, opt);
    parse_fail("run", "unknown command '" + opt.command + "'");
  } catch (const Error& e) {
    int code = kMathDomain;
    if (e.code() == ErrorCode::ParseError) code = kParse;
    if (e.code() == ErrorCode::VerificationFailed) code = kVerificationFailed;
    return {code, error_body(e), {}};
  }
}

}  // namespace qsemi::cli
