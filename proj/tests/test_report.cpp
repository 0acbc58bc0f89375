#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "bayesregion/bayesregion.hpp"
#include "bayesregion/report.hpp"

using namespace bayesregion;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

const char* kQubitConfig =
    "# tetrahedron on the full qubit\n"
    "space = qubit3\n"
    "pom = tetrahedron\n"
    "r_true = 0.6, 0.1, 0.1\n"
    "N = 200\n"
    "seed = 5\n"
    "lambda_grid = 120\n"
    "n_samples = 20000\n"
    "mc_seed = 9\n";

std::string temp_path(const std::string& name) {
  return (std::filesystem::path(testing::TempDir()) / name).string();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BAYESREGION_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_timestamp(nlohmann::json j) {
  j["provenance"].erase("timestamp");
  return j.dump();
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
  const ScenarioConfig c = parse(kQubitConfig);
  EXPECT_EQ(c.space, "qubit3");
  EXPECT_EQ(c.r_true, (std::vector<double>{0.6, 0.1, 0.1}));
  EXPECT_EQ(c.N, 200);
  EXPECT_EQ(c.lambda_points, 120u);
  EXPECT_EQ(c.mode, CountMode::Sampled);
  const ScenarioConfig d = parse("r_true = [0.5]\nspace = interval(0,1)\npom = sigma_z\nmode = deterministic\nbox = tight\nhessian = observed\n");
  EXPECT_EQ(d.mode, CountMode::Deterministic);
  EXPECT_EQ(d.box, SamplingBox::Tight);
  EXPECT_TRUE(d.observed_hessian);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("space = qubit3\n"), ConfigError);                  // r_true missing
  EXPECT_THROW(parse("r_true = 0.5\ncolour = blue\n"), ConfigError);      // unknown key
  EXPECT_THROW(parse("r_true = 0.5\nN = many\n"), ConfigError);           // bad number
  EXPECT_THROW(parse("r_true = 0.5\nN = 0\n"), ConfigError);
  EXPECT_THROW(parse("r_true = 0.5\nmode = random\n"), ConfigError);
  EXPECT_THROW(parse("r_true = 0.5\njust text\n"), ConfigError);
  EXPECT_THROW(load_config(temp_path("does_not_exist.cfg")), ConfigError);
}

TEST(Certify, RejectsInconsistentScenarios) {
  ScenarioConfig c = parse(kQubitConfig);
  c.r_true = {0.8, 0.4, 0.1};  // outside the Bloch ball
  EXPECT_THROW(run_certify(c), ConfigError);
  c.r_true = {0.5, 0.0};
  EXPECT_THROW(run_certify(c), ConfigError);
  c = parse(kQubitConfig);
  c.pom = "crosshair";
  EXPECT_THROW(run_certify(c), ConfigError);
}

TEST(Certify, ReportRoundTripsThroughJson) {
  const RegionReport rep = run_certify(parse(kQubitConfig));
  const nlohmann::json j = nlohmann::json::parse(report_to_json(rep).dump());
  const RegionCurve again = rebuild_curve(j);
  ASSERT_EQ(again.sizes.size(), rep.curve.sizes.size());
  for (std::size_t i = 0; i < again.sizes.size(); ++i) {
    EXPECT_NEAR(again.sizes[i], rep.curve.sizes[i], 1e-12 * (1.0 + rep.curve.sizes[i]));
    EXPECT_NEAR(again.credibilities[i], rep.curve.credibilities[i], 1e-12);
  }
  EXPECT_EQ(j.at("curve").at("case").get<std::string>(), to_string(rep.ml.region_case));
  EXPECT_EQ(j.at("dataset").at("N").get<int>(), 200);
  EXPECT_TRUE(j.at("provenance").contains("ml"));
  EXPECT_TRUE(j.at("curve").at("c_crit_asymptotic_is_approximate").get<bool>());
}

TEST(Validate, SeedChangesMonteCarloOnly) {
  ScenarioConfig c = parse(kQubitConfig);
  const RegionReport a = run_validate(c);
  c.mc_seed = 10;
  const RegionReport b = run_validate(c);
  EXPECT_EQ(a.curve.sizes, b.curve.sizes);
  EXPECT_EQ(a.curve.credibilities, b.curve.credibilities);
  EXPECT_NE(a.mc->c_hat, b.mc->c_hat);
  ASSERT_TRUE(a.discrepancy.has_value());
  EXPECT_GT(a.discrepancy->points, 0u);
}

TEST(Validate, IndependentOfThreadCount) {
  ScenarioConfig c = parse(kQubitConfig);
  c.threads = 1;
  const std::string one = without_timestamp(report_to_json(run_validate(c)));
  c.threads = 6;
  const std::string six = without_timestamp(report_to_json(run_validate(c)));
  set_thread_count(0);
  EXPECT_EQ(one, six);
}

TEST(Output, WritesAllFiles) {
  ScenarioConfig c = parse(kQubitConfig);
  const RegionReport rep = run_validate(c);
  const std::string prefix = temp_path("report_out");
  write_report(rep, prefix);
  for (const char* suffix : {".json", "_curve.csv", "_mc.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(prefix + suffix)) << suffix;
  }
  std::ifstream csv(prefix + "_curve.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "lambda,s_analytic,c_analytic,gamma,flags");
}

TEST(Cli, ExitCodes) {
  const std::string good = temp_path("good.cfg");
  std::ofstream(good) << kQubitConfig;
  EXPECT_EQ(run_cli("certify " + good + " -o " + temp_path("cli_out")), 0);
  EXPECT_TRUE(std::filesystem::exists(temp_path("cli_out.json")));

  const std::string bad_pom = temp_path("bad_pom.cfg");
  std::ofstream(bad_pom) << "space = qubit3\npom = octahedron\nr_true = 0.5,0,0\n";
  EXPECT_EQ(run_cli("certify " + bad_pom), 2);

  const std::string unphysical = temp_path("unphysical.cfg");
  std::ofstream(unphysical) << "space = qubit3\npom = tetrahedron\nr_true = 0.8,0.4,0.1\nN = 90\n";
  EXPECT_EQ(run_cli("certify " + unphysical), 2);

  EXPECT_EQ(run_cli("certify " + temp_path("missing.cfg")), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("sample qubit3 100 1 --box tight -o " + temp_path("s.csv")), 0);
  EXPECT_EQ(run_cli("sample qubit9 100 1"), 2);
  EXPECT_EQ(run_cli("volume qubit2 --count 1000"), 0);
  EXPECT_EQ(run_cli("specfun-selftest"), 0);
}

TEST(Cli, ValidateIsDeterministicAcrossThreads) {
  const std::string cfg = temp_path("det.cfg");
  std::ofstream(cfg) << kQubitConfig;
  ASSERT_EQ(run_cli("--threads 1 validate " + cfg + " -o " + temp_path("t1")), 0);
  ASSERT_EQ(run_cli("--threads 3 validate " + cfg + " -o " + temp_path("t3")), 0);
  auto load = [](const std::string& p) {
    std::ifstream is(p);
    nlohmann::json j = nlohmann::json::parse(is);
    j["config"].erase("threads");
    j["config"].erase("output");
    return without_timestamp(j);
  };
  EXPECT_EQ(load(temp_path("t1.json")), load(temp_path("t3.json")));
}
