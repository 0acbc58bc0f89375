#ifndef BAYESREGION_REPORT_HPP
#define BAYESREGION_REPORT_HPP

// Scenario configs and the certify/validate pipelines behind the CLI.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayesregion/mcvalidate.hpp"
#include "bayesregion/mle.hpp"
#include "bayesregion/model.hpp"
#include "bayesregion/regions.hpp"
#include "bayesregion/statespace.hpp"

namespace bayesregion {

inline constexpr const char* kVersion = "0.1.0";

enum class CountMode { Deterministic, Sampled };

/// Flat key = value scenario description. Every field has a default so that
/// the effective configuration can always be written back out in full.
struct ScenarioConfig {
  std::string space = "qubit3";
  std::string pom = "tetrahedron";
  int outcomes = 90;
  std::uint64_t pom_seed = kDefaultPomSeed;
  std::vector<double> r_true;
  std::int64_t N = 100;
  std::uint64_t seed = 1;
  CountMode mode = CountMode::Sampled;
  std::size_t lambda_points = 400;
  double lambda_min = 1e-6;
  double lambda_max = 1.0;
  std::size_t n_samples = 100000;
  std::uint64_t mc_seed = 2;
  double window_lo = 0.01;
  double window_hi = 0.9;
  SamplingBox box = SamplingBox::Paper;
  bool observed_hessian = false;
  unsigned threads = 0;
  std::string output;
  double eps_scale = 1.0;
  int boundary_samples = 512;
  std::uint64_t boundary_seed = 3;
  double truncation_floor = 1e-4;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (!is || !(is >> std::ws).eof()) throw ConfigError("config: bad value for " + key + ": '" + value + "'");
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::string v = value;
  for (char& ch : v) {
    if (ch == ',' || ch == '(' || ch == ')' || ch == '[' || ch == ']') ch = ' ';
  }
  std::istringstream is(v);
  std::vector<double> out;
  double x;
  while (is >> x) out.push_back(x);
  if (!(is >> std::ws).eof()) throw ConfigError("config: bad list for " + key + ": '" + value + "'");
  return out;
}

}  // namespace detail

inline void apply_config_value(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "space") cfg.space = value;
  else if (key == "pom") cfg.pom = value;
  else if (key == "outcomes") cfg.outcomes = parse_number<int>(key, value);
  else if (key == "pom_seed") cfg.pom_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "r_true") cfg.r_true = detail::parse_list(key, value);
  else if (key == "N") cfg.N = parse_number<std::int64_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "mode") {
    if (value == "deterministic") cfg.mode = CountMode::Deterministic;
    else if (value == "sampled") cfg.mode = CountMode::Sampled;
    else throw ConfigError("config: mode must be deterministic or sampled");
  } else if (key == "lambda_grid") cfg.lambda_points = parse_number<std::size_t>(key, value);
  else if (key == "lambda_min") cfg.lambda_min = parse_number<double>(key, value);
  else if (key == "lambda_max") cfg.lambda_max = parse_number<double>(key, value);
  else if (key == "n_samples") cfg.n_samples = parse_number<std::size_t>(key, value);
  else if (key == "mc_seed") cfg.mc_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "lambda_lo") cfg.window_lo = parse_number<double>(key, value);
  else if (key == "lambda_hi") cfg.window_hi = parse_number<double>(key, value);
  else if (key == "box") {
    if (value == "paper") cfg.box = SamplingBox::Paper;
    else if (value == "tight") cfg.box = SamplingBox::Tight;
    else throw ConfigError("config: box must be paper or tight");
  } else if (key == "hessian") {
    if (value == "fisher") cfg.observed_hessian = false;
    else if (value == "observed") cfg.observed_hessian = true;
    else throw ConfigError("config: hessian must be fisher or observed");
  } else if (key == "threads") cfg.threads = parse_number<unsigned>(key, value);
  else if (key == "output") cfg.output = value;
  else if (key == "eps_scale") cfg.eps_scale = parse_number<double>(key, value);
  else if (key == "boundary_samples") cfg.boundary_samples = parse_number<int>(key, value);
  else if (key == "boundary_seed") cfg.boundary_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "truncation_floor") cfg.truncation_floor = parse_number<double>(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_config_value(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  if (cfg.r_true.empty()) throw ConfigError("config: r_true is required");
  if (cfg.N <= 0) throw ConfigError("config: N must be positive");
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = {{"space", c.space},
       {"pom", c.pom},
       {"outcomes", c.outcomes},
       {"pom_seed", c.pom_seed},
       {"r_true", c.r_true},
       {"N", c.N},
       {"seed", c.seed},
       {"mode", c.mode == CountMode::Deterministic ? "deterministic" : "sampled"},
       {"lambda_grid", c.lambda_points},
       {"lambda_min", c.lambda_min},
       {"lambda_max", c.lambda_max},
       {"n_samples", c.n_samples},
       {"mc_seed", c.mc_seed},
       {"lambda_lo", c.window_lo},
       {"lambda_hi", c.window_hi},
       {"box", c.box == SamplingBox::Paper ? "paper" : "tight"},
       {"hessian", c.observed_hessian ? "observed" : "fisher"},
       {"eps_scale", c.eps_scale},
       {"boundary_samples", c.boundary_samples},
       {"boundary_seed", c.boundary_seed},
       {"truncation_floor", c.truncation_floor}};
}

inline void to_json(nlohmann::json& j, const MlResult& ml) {
  j = {{"r_ml", vector_to_json(ml.r_ml)},
       {"log_L_max", ml.log_L_max},
       {"on_boundary", ml.on_boundary},
       {"case", to_string(ml.region_case)},
       {"F_ml", matrix_to_json(ml.F_ml)},
       {"fisher_point", vector_to_json(ml.fisher_point)},
       {"g_ml", vector_to_json(ml.g_ml)},
       {"lambda_int", ml.lambda_int},
       {"lambda_bd", ml.lambda_bd},
       {"r_P", vector_to_json(ml.r_P)},
       {"ellipsoid_exits", ml.ellipsoid_exits},
       {"boundary_search_found", ml.boundary_search_found},
       {"iterations", ml.iterations},
       {"converged", ml.converged},
       {"gradient_norm", ml.gradient_norm},
       {"projected_gradient_norm", ml.projected_gradient_norm},
       {"warnings", ml.warnings}};
}

struct Discrepancy {
  double lo = 0.0, hi = 0.0;
  double max_abs_dc = 0.0;
  double max_normalized_dc = 0.0;  // |dc| / c_stderr
  double max_abs_ds = 0.0;
  std::size_t points = 0;
  bool resolution_exhausted = false;
};

struct RegionReport {
  ScenarioConfig config;
  Dataset data;
  MlResult ml;
  RegionCurve curve;
  std::optional<McEstimate> mc;
  std::optional<Discrepancy> discrepancy;
  std::string timestamp;
  MlOptions ml_options;
  BoundarySearchOptions boundary_options;
};

inline Discrepancy compare_curves(const RegionCurve& curve, const McEstimate& mc, double lo, double hi) {
  Discrepancy d;
  d.lo = lo;
  d.hi = hi;
  for (std::size_t i = 0; i < curve.lambdas.size() && i < mc.lambdas.size(); ++i) {
    const double lam = curve.lambdas[i];
    if (lam < lo || lam > hi) continue;
    ++d.points;
    const double dc = std::abs(curve.credibilities[i] - mc.c_hat[i]);
    d.max_abs_dc = std::max(d.max_abs_dc, dc);
    d.max_abs_ds = std::max(d.max_abs_ds, std::abs(curve.sizes[i] - mc.s_hat[i]));
    if (mc.c_stderr[i] > 0.0) d.max_normalized_dc = std::max(d.max_normalized_dc, dc / mc.c_stderr[i]);
    if (mc.resolution_exhausted[i]) d.resolution_exhausted = true;
  }
  if (d.points == 0) d.resolution_exhausted = true;
  return d;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline std::vector<double> config_grid(const ScenarioConfig& cfg) {
  return default_lambda_grid(cfg.lambda_points, cfg.lambda_min, cfg.lambda_max);
}

/// Simulate (or round) the data, fit, classify and evaluate the closed forms.
inline RegionReport run_certify(const ScenarioConfig& cfg) {
  if (cfg.threads > 0) set_thread_count(cfg.threads);
  RegionReport rep;
  rep.config = cfg;
  const StateSpace space = make_space(cfg.space);
  const Pom pom = make_pom(cfg.pom, space, cfg.outcomes, cfg.pom_seed);
  if (static_cast<int>(cfg.r_true.size()) != space.dim()) {
    throw ConfigError("r_true has " + std::to_string(cfg.r_true.size()) + " entries, space " + cfg.space +
                      " needs " + std::to_string(space.dim()));
  }
  const ParamVector r_true = Eigen::Map<const ParamVector>(cfg.r_true.data(), space.dim());
  if (!space.is_physical(r_true)) throw ConfigError("r_true is not a physical point of " + cfg.space);
  rep.data = cfg.mode == CountMode::Deterministic ? deterministic_counts(pom, r_true, cfg.N)
                                                  : sample_dataset(pom, r_true, cfg.N, cfg.seed);
  rep.ml_options.use_observed_hessian = cfg.observed_hessian;
  rep.boundary_options.samples = cfg.boundary_samples;
  rep.boundary_options.eps_scale = cfg.eps_scale;
  rep.boundary_options.seed = cfg.boundary_seed;
  rep.boundary_options.lambda_min = cfg.truncation_floor;
  rep.ml = analyze(pom, rep.data, space, rep.ml_options, rep.boundary_options);
  rep.curve = build_region_curve(region_inputs(rep.ml, space), config_grid(cfg));
  rep.timestamp = utc_timestamp();
  return rep;
}

/// certify plus a Monte Carlo curve on the same grid and the discrepancy summary.
inline RegionReport run_validate(const ScenarioConfig& cfg) {
  RegionReport rep = run_certify(cfg);
  const StateSpace space = make_space(cfg.space);
  const Pom pom = make_pom(cfg.pom, space, cfg.outcomes, cfg.pom_seed);
  rep.mc = mc_region_curve(pom, rep.data, space, rep.curve.lambdas, cfg.n_samples, cfg.mc_seed, rep.ml.log_L_max,
                           cfg.box);
  rep.discrepancy = compare_curves(rep.curve, *rep.mc, cfg.window_lo, cfg.window_hi);
  return rep;
}

inline nlohmann::json report_to_json(const RegionReport& rep) {
  nlohmann::json j;
  j["config"] = rep.config;
  j["dataset"] = rep.data;
  j["ml"] = rep.ml;
  j["curve"] = rep.curve;
  if (rep.mc) {
    j["mc"] = *rep.mc;
    j["lambda_crit_pair"] = {{"analytic", rep.curve.lambda_crit},
                             {"monte_carlo", rep.mc->lambda_crit},
                             {"monte_carlo_stderr", rep.mc->lambda_crit_stderr}};
  }
  if (rep.discrepancy) {
    const auto& d = *rep.discrepancy;
    j["discrepancy"] = {{"lambda_lo", d.lo},
                        {"lambda_hi", d.hi},
                        {"points", d.points},
                        {"max_abs_dc", d.max_abs_dc},
                        {"max_abs_ds", d.max_abs_ds},
                        {"max_dc_over_stderr", d.max_normalized_dc},
                        {"resolution_exhausted", d.resolution_exhausted}};
  }
  j["provenance"] = {
      {"version", kVersion},
      {"timestamp", rep.timestamp},
      {"ml", {{"tol_grad_per_copy", rep.ml_options.tol_grad_per_copy},
              {"max_iter", rep.ml_options.max_iter},
              {"retract_delta", rep.ml_options.retract_delta},
              {"hessian", rep.ml_options.use_observed_hessian ? "observed" : "fisher"},
              {"step_rule", "projected gradient, Barzilai-Borwein with Armijo c=1e-4, Newton when interior"}}},
      {"boundary_search", {{"samples", rep.boundary_options.samples},
                           {"eps_scale", rep.boundary_options.eps_scale},
                           {"seed", rep.boundary_options.seed},
                           {"rel_tol", rep.boundary_options.rel_tol},
                           {"max_rounds", rep.boundary_options.max_rounds},
                           {"lambda_min", rep.boundary_options.lambda_min}}},
      {"mc", {{"sample_streams", kSampleStreams}, {"min_shell_samples", kMinShellSamples}}},
      {"pom_construction", rep.config.pom.rfind("random_bases", 0) == 0
                               ? "Haar-random orthonormal bases, outcomes/3 of them, seeded by pom_seed"
                               : "fixed"},
      {"probability_floor", kProbabilityFloor},
      {"psd_tolerance", kPsdTolerance}};
  return j;
}

/// Rebuilds the analytic curve stored in a report from its recorded inputs.
inline RegionCurve rebuild_curve(const nlohmann::json& report) {
  const auto& c = report.at("curve");
  RegionInputs in = c.at("inputs").get<RegionInputs>();
  return build_region_curve(in, c.at("lambdas").get<std::vector<double>>());
}

/// Writes <prefix>.json, <prefix>_curve.csv and, when present, <prefix>_mc.csv.
inline void write_report(const RegionReport& rep, const std::string& prefix) {
  {
    std::ofstream os(prefix + ".json");
    if (!os) throw ConfigError("cannot write " + prefix + ".json");
    os << std::setw(2) << report_to_json(rep) << '\n';
  }
  {
    std::ofstream os(prefix + "_curve.csv");
    if (!os) throw ConfigError("cannot write " + prefix + "_curve.csv");
    write_csv(os, rep.curve);
  }
  if (rep.mc) {
    std::ofstream os(prefix + "_mc.csv");
    if (!os) throw ConfigError("cannot write " + prefix + "_mc.csv");
    write_csv(os, *rep.mc);
  }
}

}  // namespace bayesregion

#endif  // BAYESREGION_REPORT_HPP
