// Command-line front end: bounds, measurement synthesis, classical and NPA
// bounds, randomness curves and the Gram-matrix SDP demonstration.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bellbound/bell.hpp"
#include "bellbound/io.hpp"
#include "bellbound/npa.hpp"
#include "bellbound/parallel.hpp"
#include "bellbound/sdp.hpp"
#include "bellbound/states.hpp"

namespace {

using namespace bellbound;
using io::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Parameters typed as rounded decimals (0.7854 for pi/4) land slightly outside
// the family domain; anything this close to an endpoint is snapped onto it.
constexpr double kEndpointSnap = 1e-5;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string state = "singlet";
  double theta = std::numbers::pi / 4;
  double p = 1.0;
  std::string state_file;
  std::string expr = "ebi";
  std::size_t n = 3;
  std::string level = "2";
  std::string pair = "1,1";
  std::string constraint = "eq";
  std::string family;
  std::string grid;
  std::string compare;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 0;
  bool json = false;
  // Solver overrides; zero keeps the library default.
  int max_iterations = 0;
  double gap_tolerance = 0.0;
  double feasibility_tolerance = 0.0;
};

// ---------------------------------------------------------------------------
// Config resolution

double snap_to_domain(double v, double lo, double hi, const char* what) {
  if (v < lo && v >= lo - kEndpointSnap) return lo;
  if (v > hi && v <= hi + kEndpointSnap) return hi;
  if (!(v >= lo && v <= hi)) throw ConfigError(std::string(what) + " " + io::sig(v) + " outside [" + io::sig(lo) + ", " + io::sig(hi) + "]");
  return v;
}

StateFamily parse_family(const std::string& s) {
  if (s == "pure" || s == "pure-theta") return StateFamily::PureTheta;
  if (s == "werner" || s == "werner-p") return StateFamily::WernerP;
  throw ConfigError("unknown family '" + s + "' (expected pure or werner)");
}

double snap_family_param(StateFamily f, double v) {
  const auto [lo, hi] = family_domain(f);
  return snap_to_domain(v, lo, hi, f == StateFamily::PureTheta ? "theta" : "p");
}

TwoQubitState make_state(const RunConfig& c, std::string& label) {
  if (c.state == "singlet") {
    label = "singlet";
    return singlet();
  }
  if (c.state == "pure") {
    const double t = snap_family_param(StateFamily::PureTheta, c.theta);
    label = "pure(theta=" + io::fixed(t) + ")";
    return pure_state(t);
  }
  if (c.state == "werner") {
    const double p = snap_family_param(StateFamily::WernerP, c.p);
    label = "werner(p=" + io::fixed(p) + ")";
    return werner_state(p);
  }
  if (c.state == "file") {
    if (c.state_file.empty()) throw ConfigError("--state file needs --state-file PATH");
    std::ifstream in(c.state_file);
    if (!in) throw ConfigError("cannot read " + c.state_file);
    label = c.state_file;
    return io::state_from_json(json::parse(in));
  }
  throw ConfigError("unknown state '" + c.state + "' (expected singlet, pure, werner or file)");
}

BellExpression make_expr(const std::string& name, std::size_t n) {
  if (name == "ebi") return ebi();
  if (name == "chsh") return chsh();
  if (name == "chained") {
    if (n < 2) throw ConfigError("chained expression needs --n >= 2");
    return chained(n);
  }
  throw ConfigError("unknown expression '" + name + "' (expected ebi, chsh or chained)");
}

std::string expr_label(const BellExpression& e) { return e.name; }

std::vector<double> parse_grid(const std::string& spec, StateFamily f) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("grid must be start:stop:steps");
  double start, stop;
  long steps;
  try {
    std::size_t used = 0;
    start = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("start");
    stop = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("stop");
    steps = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("steps");
  } catch (const std::exception&) {
    throw ConfigError("grid must be start:stop:steps with numeric fields");
  }
  if (steps < 2) throw ConfigError("grid needs at least 2 steps");
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (long i = 0; i < steps; ++i)
    g[static_cast<std::size_t>(i)] = snap_family_param(f, start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1));
  return g;
}

SdpOptions sdp_options(const RunConfig& c) {
  SdpOptions o;
  if (c.max_iterations < 0 || c.gap_tolerance < 0.0 || c.feasibility_tolerance < 0.0)
    throw ConfigError("solver overrides must be positive");
  if (c.max_iterations > 0) o.max_iterations = c.max_iterations;
  if (c.gap_tolerance > 0.0) o.gap_tolerance = c.gap_tolerance;
  if (c.feasibility_tolerance > 0.0) o.feasibility_tolerance = c.feasibility_tolerance;
  return o;
}

GuessingOptions guessing_options(const RunConfig& c) {
  GuessingOptions o;
  o.level = parse_level(c.level);
  int x = 0, y = 0;
  char comma = 0;
  std::istringstream ps(c.pair);
  if (!(ps >> x >> comma >> y) || comma != ',' || !ps.eof() || x < 1 || y < 1)
    throw ConfigError("pair must be x,y with 1-based settings");
  o.x = static_cast<std::size_t>(x - 1);
  o.y = static_cast<std::size_t>(y - 1);
  if (c.constraint == "eq")
    o.constraint = BellConstraint::Equality;
  else if (c.constraint == "ge")
    o.constraint = BellConstraint::AtLeast;
  else
    throw ConfigError("constraint must be eq or ge");
  o.sdp = sdp_options(c);
  return o;
}

std::size_t thread_count(const RunConfig& c) { return c.threads > 0 ? c.threads : default_thread_count(); }

/// Fills every field not given on the command line from a JSON config file.
void apply_config_file(RunConfig& c, const std::string& path, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "command") {
        if (c.command.empty()) c.command = v.get<std::string>();
      } else if (key == "state") {
        if (!given("--state")) c.state = v.get<std::string>();
      } else if (key == "theta") {
        if (!given("--theta")) c.theta = v.get<double>();
      } else if (key == "p") {
        if (!given("--p")) c.p = v.get<double>();
      } else if (key == "state_file") {
        if (!given("--state-file")) c.state_file = v.get<std::string>();
      } else if (key == "expr") {
        if (!given("--expr")) c.expr = v.get<std::string>();
      } else if (key == "n") {
        if (!given("--n")) c.n = v.get<std::size_t>();
      } else if (key == "level") {
        if (!given("--level")) c.level = v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>());
      } else if (key == "pair") {
        if (!given("--pair"))
          c.pair = v.is_string() ? v.get<std::string>()
                                 : std::to_string(v.at(0).get<int>()) + "," + std::to_string(v.at(1).get<int>());
      } else if (key == "constraint") {
        if (!given("--constraint")) c.constraint = v.get<std::string>();
      } else if (key == "family") {
        if (!given("--family")) c.family = v.get<std::string>();
      } else if (key == "grid") {
        if (!given("--grid"))
          c.grid = v.is_string() ? v.get<std::string>()
                                 : io::sig(v.at("start").get<double>(), 17) + ":" + io::sig(v.at("stop").get<double>(), 17) +
                                       ":" + std::to_string(v.at("steps").get<long>());
      } else if (key == "compare") {
        if (!given("--compare")) c.compare = v.get<std::string>();
      } else if (key == "out") {
        if (!given("--out")) c.out = v.get<std::string>();
      } else if (key == "seed") {
        if (!given("--seed")) c.seed = v.get<std::uint64_t>();
      } else if (key == "threads") {
        if (!given("--threads")) c.threads = v.get<std::size_t>();
      } else if (key == "max_iterations") {
        if (!given("--max-iterations")) c.max_iterations = v.get<int>();
      } else if (key == "gap_tolerance") {
        if (!given("--gap-tol")) c.gap_tolerance = v.get<double>();
      } else if (key == "feasibility_tolerance") {
        if (!given("--feas-tol")) c.feasibility_tolerance = v.get<double>();
      } else if (key == "json") {
        if (!given("--json")) c.json = v.get<bool>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

void emit_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_bound(const RunConfig& c) {
  std::string label;
  const TwoQubitState st = make_state(c, label);
  const SvdResult3 svd = correlation_svd(st);
  const double bound = tight_bound(svd);
  const double cb = classical_bound(ebi());
  const bool violation = bound > cb + tol::kTightness;
  if (c.json) {
    emit_json({{"state", label},
               {"singular_values", {io::round_sig(svd.singular_values[0]), io::round_sig(svd.singular_values[1]),
                                    io::round_sig(svd.singular_values[2])}},
               {"tight_bound", io::round_sig(bound)},
               {"classical_bound", io::round_sig(cb)},
               {"violation", violation}});
  } else {
    std::cout << "state            " << label << '\n'
              << "singular values  " << io::fixed(svd.singular_values[0]) << ' ' << io::fixed(svd.singular_values[1]) << ' '
              << io::fixed(svd.singular_values[2]) << '\n'
              << "tight bound      " << io::fixed(bound) << '\n'
              << "classical bound  " << io::fixed(cb) << '\n'
              << "violation        " << (violation ? "yes" : "no") << '\n';
  }
  return kExitOk;
}

int cmd_measure(const RunConfig& c) {
  std::string label;
  const TwoQubitState st = make_state(c, label);
  const MeasurementStrategy s = optimal_measurements(st);
  const TightnessReport rep = tightness_check(st, s);
  const double value = expectation(st, ebi(), s);
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw ConfigError("cannot write " + c.out);
    io::write_behavior_csv(f, behavior_from(st, s));
  }
  if (c.json) {
    emit_json({{"state", label},
               {"strategy", io::strategy_to_json(s)},
               {"value", io::round_sig(value)},
               {"tight_bound", io::round_sig(tight_bound(st))},
               {"tightness", io::tightness_to_json(rep)}});
  } else {
    std::cout << "state        " << label << '\n';
    auto print = [](const char* who, const std::vector<Vec3>& vs) {
      for (std::size_t i = 0; i < vs.size(); ++i)
        std::cout << who << (i + 1) << "           (" << io::fixed(vs[i][0]) << ", " << io::fixed(vs[i][1]) << ", "
                  << io::fixed(vs[i][2]) << ")\n";
    };
    print("a", s.alice);
    print("b", s.bob);
    std::cout << "value        " << io::fixed(value) << '\n'
              << "tight bound  " << io::fixed(tight_bound(st)) << '\n'
              << "tightness    proportionality " << (rep.proportionality_ok ? "ok" : "FAIL") << ", gram sum "
              << io::fixed(rep.gram_sum) << (rep.gram_sum_ok ? " ok" : " FAIL") << ", alice aligned "
              << (rep.alice_aligned ? "ok" : "FAIL") << '\n';
  }
  return kExitOk;
}

int cmd_classical(const RunConfig& c) {
  const BellExpression e = make_expr(c.expr, c.n);
  const double cb = classical_bound(e);
  if (c.json)
    emit_json({{"expr", expr_label(e)}, {"classical_bound", io::round_sig(cb)}});
  else
    std::cout << "classical bound (" << expr_label(e) << ")  " << io::fixed(cb) << '\n';
  return kExitOk;
}

int cmd_tsirelson(const RunConfig& c) {
  const BellExpression e = make_expr(c.expr, c.n);
  const NpaLevel level = parse_level(c.level);
  const MomentStructure ms(Scenario::of(e), level);
  const auto r = maximize_moments(ms, bell_form(ms, e), nullptr, 0.0, BellConstraint::Equality, sdp_options(c));
  detail::require_usable(r.solution, "tsirelson_bound");
  if (c.json) {
    emit_json({{"expr", expr_label(e)},
               {"level", to_string(level)},
               {"tsirelson_bound", io::round_sig(r.value)},
               {"moment_matrix_size", ms.size()},
               {"status", to_string(r.solution.status)},
               {"gap", io::round_sig(r.solution.gap)},
               {"iterations", r.solution.iterations}});
  } else {
    std::cout << "tsirelson bound (" << expr_label(e) << ", level " << to_string(level) << ")  " << io::fixed(r.value)
              << '\n'
              << "moment matrix    " << ms.size() << " x " << ms.size() << ", solver " << to_string(r.solution.status)
              << " after " << r.solution.iterations << " iterations\n";
  }
  return kExitOk;
}

int cmd_randomness(const RunConfig& c) {
  if (c.family.empty()) throw ConfigError("randomness needs --family");
  if (c.grid.empty()) throw ConfigError("randomness needs --grid start:stop:steps");
  const StateFamily fam = parse_family(c.family);
  const std::vector<double> grid = parse_grid(c.grid, fam);
  const BellExpression e = make_expr(c.expr, c.n);
  const GuessingOptions opt = guessing_options(c);
  const std::size_t threads = thread_count(c);
  std::optional<BellExpression> cmp;
  if (!c.compare.empty()) cmp = make_expr(c.compare, c.n);

  const CurveResult curve = try_min_entropy_curve(fam, grid, e, opt, threads, c.seed);

  std::ofstream file;
  if (!c.out.empty()) {
    file.open(c.out);
    if (!file) throw ConfigError("cannot write " + c.out);
  }
  if (c.out.empty() && c.json) throw ConfigError("--json with randomness needs --out for the CSV");
  std::ostream& csv = c.out.empty() ? std::cout : file;
  std::ostream& report = c.out.empty() ? std::cerr : std::cout;

  csv << io::kCurveHeader << '\n';
  for (const auto& p : curve.points) csv << io::curve_row(p) << '\n';
  if (curve.failure) {
    csv << "# truncated at param " << io::sig(grid[curve.failed_index]) << ": " << *curve.failure << '\n';
    csv.flush();
    std::cerr << "error: solver failure at param " << io::sig(grid[curve.failed_index]) << ": " << *curve.failure << '\n';
    return kExitNumerical;
  }
  csv.flush();

  const RandomnessPoint* best = &curve.points.front();
  for (const auto& p : curve.points)
    if (p.min_entropy > best->min_entropy) best = &p;

  std::vector<double> crossings;
  if (cmp) {
    const CurveResult other = try_min_entropy_curve(fam, grid, *cmp, opt, threads, c.seed);
    if (other.failure) {
      std::cerr << "error: solver failure in comparison curve: " << *other.failure << '\n';
      return kExitNumerical;
    }
    crossings = entropy_crossings(curve.points, other.points);
  }

  if (c.json) {
    json j{{"expr", expr_label(e)},
           {"family", c.family},
           {"level", to_string(opt.level)},
           {"pair", {opt.x + 1, opt.y + 1}},
           {"points", curve.points.size()},
           {"max_min_entropy_bits", io::round_sig(best->min_entropy)},
           {"max_at_param", io::round_sig(best->param)},
           {"csv", c.out}};
    if (cmp) {
      json xs = json::array();
      for (double x : crossings) xs.push_back(io::round_sig(x));
      j["compare"] = expr_label(*cmp);
      j["crossings"] = std::move(xs);
    }
    emit_json(j);
  } else {
    report << "max min-entropy " << io::fixed(best->min_entropy) << " bits at param " << io::fixed(best->param) << " ("
           << expr_label(e) << ", level " << to_string(opt.level) << ", pair " << opt.x + 1 << ',' << opt.y + 1 << ")\n";
    if (cmp) {
      report << "crossings vs " << expr_label(*cmp) << ':';
      if (crossings.empty()) report << " none";
      for (double x : crossings) report << ' ' << io::fixed(x);
      report << '\n';
    }
  }
  return kExitOk;
}

int cmd_gram_demo(const RunConfig& c) {
  const SdpSolution sol = solve(gram_problem(), sdp_options(c));
  const std::array<double, 4> y{sol.y[0], sol.y[1], sol.y[2], sol.y[3]};
  const CertificateCheck cert = dual_certificate_check(y);
  const bool ok = sol.optimal() && std::abs(sol.primal_obj + 2.0) <= 1e-6 && std::abs(sol.dual_obj + 2.0) <= 1e-6 &&
                  cert.min_eigenvalue >= -1e-9;
  if (c.json) {
    emit_json({{"primal", io::round_sig(sol.primal_obj)},
               {"dual", io::round_sig(sol.dual_obj)},
               {"dual_vector", {io::round_sig(y[0]), io::round_sig(y[1]), io::round_sig(y[2]), io::round_sig(y[3])}},
               {"certificate_min_eigenvalue", io::round_sig(cert.min_eigenvalue)},
               {"status", to_string(sol.status)},
               {"ok", ok}});
  } else {
    std::cout << "primal optimum   " << io::fixed(sol.primal_obj) << '\n'
              << "dual optimum     " << io::fixed(sol.dual_obj) << '\n'
              << "dual vector      " << io::fixed(y[0]) << ' ' << io::fixed(y[1]) << ' ' << io::fixed(y[2]) << ' '
              << io::fixed(y[3]) << '\n'
              << "certificate      min eigenvalue " << io::fixed(cert.min_eigenvalue, 12) << '\n'
              << "solver           " << to_string(sol.status) << " after " << sol.iterations << " iterations\n";
  }
  if (!ok) {
    std::cerr << "error: Gram problem did not reach the expected optimum -2\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int dispatch(const RunConfig& c) {
  if (c.command == "bound") return cmd_bound(c);
  if (c.command == "measure") return cmd_measure(c);
  if (c.command == "classical") return cmd_classical(c);
  if (c.command == "tsirelson") return cmd_tsirelson(c);
  if (c.command == "randomness") return cmd_randomness(c);
  if (c.command == "gram-demo") return cmd_gram_demo(c);
  if (c.command.empty()) throw ConfigError("no command given (try --help)");
  throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-inequality bounds, NPA relaxations and certified randomness"};
  app.set_version_flag("--version", "bellbound 1.0");

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with RunConfig fields; command-line flags take precedence");
  app.add_flag("--json", cfg.json, "Machine-readable JSON output");
  app.add_option("--out", cfg.out, "Output path for CSV data");
  app.add_option("--seed", cfg.seed, "Seed for see-saw restarts");
  app.add_option("--threads", cfg.threads, "Worker count for sweeps (default: BELLBOUND_THREADS or all cores)");
  app.add_option("--state", cfg.state, "singlet | pure | werner | file");
  app.add_option("--theta", cfg.theta, "Pure-state angle in radians, [0, pi/4]");
  app.add_option("--p", cfg.p, "Werner visibility in [0, 1]");
  app.add_option("--state-file", cfg.state_file, "JSON density matrix for --state file");
  app.add_option("--expr", cfg.expr, "ebi | chsh | chained");
  app.add_option("--n", cfg.n, "Number of settings for the chained expression");
  app.add_option("--level", cfg.level, "NPA level: 1, 1+AB or 2");
  app.add_option("--pair", cfg.pair, "Input pair x,y (1-based) for randomness");
  app.add_option("--constraint", cfg.constraint, "Bell-value constraint: eq or ge");
  app.add_option("--family", cfg.family, "pure | werner");
  app.add_option("--grid", cfg.grid, "start:stop:steps, endpoints inclusive");
  app.add_option("--compare", cfg.compare, "Second expression for entropy crossings");
  app.add_option("--max-iterations", cfg.max_iterations, "SDP iteration cap (default 200)");
  app.add_option("--gap-tol", cfg.gap_tolerance, "SDP relative gap tolerance (default 1e-8)");
  app.add_option("--feas-tol", cfg.feasibility_tolerance, "SDP feasibility tolerance (default 1e-8)");

  const std::vector<std::pair<const char*, const char*>> commands{
      {"bound", "Tight upper bound of the elegant inequality for a state"},
      {"measure", "Optimal measurements and tightness report"},
      {"classical", "Classical bound by enumeration"},
      {"tsirelson", "Quantum bound from the NPA relaxation"},
      {"randomness", "Certified min-entropy along a state family (CSV)"},
      {"gram-demo", "Gram-matrix SDP with its dual certificate"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path, app);
    return dispatch(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InfeasibleValue& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
