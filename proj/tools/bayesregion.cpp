// Command-line front end: certify, validate, sample, volume, specfun-selftest.
// Exit codes: 0 ok, 1 numerical failure, 2 configuration error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "bayesregion/bayesregion.hpp"
#include "bayesregion/report.hpp"

namespace br = bayesregion;

namespace {

constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

void print_summary(const br::RegionReport& rep) {
  std::cout << std::setprecision(10);
  std::cout << "case         " << br::to_string(rep.ml.region_case) << '\n';
  std::cout << "r_ml         " << rep.ml.r_ml.transpose() << '\n';
  std::cout << "lambda_crit  " << rep.curve.lambda_crit << '\n';
  std::cout << "c_crit       " << rep.curve.c_crit_exact << '\n';
  if (rep.ml.region_case == br::RegionCase::InteriorTruncated) std::cout << "lambda_int   " << rep.ml.lambda_int << '\n';
  if (rep.ml.region_case == br::RegionCase::Boundary) std::cout << "lambda_bd    " << rep.ml.lambda_bd << '\n';
  if (rep.mc) {
    std::cout << "mc lambda_crit " << rep.mc->lambda_crit << " +- " << rep.mc->lambda_crit_stderr << '\n';
  }
  if (rep.discrepancy) {
    std::cout << "max |dc|     " << rep.discrepancy->max_abs_dc << " (" << rep.discrepancy->max_normalized_dc
              << " stderr)" << (rep.discrepancy->resolution_exhausted ? "  [resolution exhausted]" : "") << '\n';
  }
  for (const auto& w : rep.ml.warnings) std::cout << "warning: " << w << '\n';
  for (const auto& w : rep.curve.warnings) std::cout << "warning: " << w << '\n';
}

int specfun_selftest() {
  namespace sf = br::specfun;
  int failures = 0;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      std::cout << "FAIL " << what << '\n';
    }
  };
  for (int i = 1; i <= 20; ++i) {
    const double a = 0.5 * i;
    for (int k = 0; k <= 40; ++k) {
      const double y = std::pow(10.0, -2.0 + k * (std::log10(50.0) + 2.0) / 40.0);
      const double lhs = sf::upper_incomplete_gamma(a + 1.0, y);
      const double rhs = a * sf::upper_incomplete_gamma(a, y) + std::pow(y, a) * std::exp(-y);
      check(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs), "gamma recurrence a=" + std::to_string(a) +
                                                               " y=" + std::to_string(y));
      const double q = sf::regularized_gamma_q(a, y);
      if (q > 1e-300 && q < 1.0) {
        const double back = sf::regularized_gamma_q(a, sf::inverse_regularized_gamma_q(a, q));
        check(std::abs(back - q) <= 1e-10 * q + 1e-12, "inverse gamma round trip");
      }
    }
  }
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    for (double a : {0.5, 1.0, 1.5, 2.0, 4.5, 10.0}) {
      for (double b : {0.5, 1.0, 2.5, 3.0, 7.0}) {
        const double s = sf::regularized_incomplete_beta(x, a, b) + sf::regularized_incomplete_beta(1.0 - x, b, a);
        check(std::abs(s - 1.0) <= 1e-12, "beta reflection");
      }
    }
  }
  std::cout << (failures == 0 ? "specfun self-test passed\n" : "specfun self-test FAILED\n");
  return failures == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian region sizes and credibilities for constrained ML estimators"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

  std::string config_path, output;
  bool det_counts = false;
  auto* certify = app.add_subcommand("certify", "Fit, classify and write the analytic region curves");
  certify->add_option("config", config_path, "Scenario config (key = value lines)")->required();
  certify->add_option("-o,--output", output, "Output prefix (overrides the config)");
  certify->add_flag("--deterministic-counts", det_counts, "Use rounded expected counts instead of sampling");

  std::size_t n_samples = 0;
  std::uint64_t mc_seed = 0;
  bool mc_seed_set = false;
  auto* validate = app.add_subcommand("validate", "certify plus a Monte Carlo comparison");
  validate->add_option("config", config_path, "Scenario config")->required();
  validate->add_option("-o,--output", output, "Output prefix");
  validate->add_option("-n,--n-samples", n_samples, "Accepted Monte Carlo samples");
  validate->add_option("--seed", mc_seed, "Monte Carlo seed")->each([&](const std::string&) { mc_seed_set = true; });
  validate->add_flag("--deterministic-counts", det_counts, "Use rounded expected counts");

  std::string space_label, box_name = "paper";
  std::size_t count = 0;
  std::uint64_t seed = 1;
  auto* sample = app.add_subcommand("sample", "Uniform rejection sampling of a state space");
  sample->add_option("space", space_label, "qubit1|qubit2|qubit3|qutrit|interval(a,b)")->required();
  sample->add_option("count", count, "Accepted samples")->required();
  sample->add_option("seed", seed, "Seed")->required();
  sample->add_option("--box", box_name, "Proposal box: paper or tight");
  sample->add_option("-o,--output", output, "CSV file for the accepted points");

  auto* volume = app.add_subcommand("volume", "Exact and Monte Carlo volume of a state space");
  volume->add_option("space", space_label, "Space label")->required();
  volume->add_option("--count", count, "Accepted samples for the MC estimate")->default_val(100000);
  volume->add_option("--seed", seed, "Seed")->default_val(1);

  auto* selftest = app.add_subcommand("specfun-selftest", "Check special-function identities");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) br::set_thread_count(threads);

    if (certify->parsed() || validate->parsed()) {
      br::ScenarioConfig cfg = br::load_config(config_path);
      if (det_counts) cfg.mode = br::CountMode::Deterministic;
      if (threads > 0) cfg.threads = threads;
      if (!output.empty()) cfg.output = output;
      if (n_samples > 0) cfg.n_samples = n_samples;
      if (mc_seed_set) cfg.mc_seed = mc_seed;
      const br::RegionReport rep = validate->parsed() ? br::run_validate(cfg) : br::run_certify(cfg);
      print_summary(rep);
      if (!cfg.output.empty()) {
        br::write_report(rep, cfg.output);
        std::cout << "wrote " << cfg.output << ".json\n";
      }
      return 0;
    }

    if (sample->parsed()) {
      const br::StateSpace space = br::make_space(space_label);
      br::SamplingBox box;
      if (box_name == "paper") box = br::SamplingBox::Paper;
      else if (box_name == "tight") box = br::SamplingBox::Tight;
      else throw br::ConfigError("--box must be paper or tight");
      const br::SampleSet set = br::rejection_sample(space, count, seed, box);
      std::cout << std::setprecision(10) << "accepted " << set.size() << " attempts " << set.attempts << " yield "
                << 100.0 * set.yield() << "%\n";
      if (!output.empty()) {
        std::ofstream os(output);
        if (!os) throw br::ConfigError("cannot write " + output);
        os << std::setprecision(17);
        os << "# label=" << set.label << " seed=" << set.seed << " attempts=" << set.attempts
           << " yield=" << set.yield() << " box=" << box_name << '\n';
        for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
          for (Eigen::Index j = 0; j < set.points.cols(); ++j) os << (j ? "," : "") << set.points(i, j);
          os << '\n';
        }
      }
      return 0;
    }

    if (volume->parsed()) {
      const br::StateSpace space = br::make_space(space_label);
      const br::SampleSet set = br::rejection_sample(space, count, seed, br::SamplingBox::Paper);
      const br::VolumeEstimate v = br::mc_volume(space, set);
      std::cout << std::setprecision(12) << "exact " << space.volume() << "\nmc    " << v.volume << " +- "
                << v.stderr_ << "\nyield " << 100.0 * set.yield() << "%\n";
      return 0;
    }

    if (selftest->parsed()) return specfun_selftest();
  } catch (const br::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const br::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
