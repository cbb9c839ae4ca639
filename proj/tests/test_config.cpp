#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sbising/cli/config.hpp"
#include "sbising/cli/experiment.hpp"

using namespace sbising;
using namespace sbising::cli;

namespace {

const std::string kCorrelation = R"([experiment]
schema = 1
kind = correlation
seed = 5
output = OUT

[kernel]
type = modes
modes = 1:1, 0.5:2

[ising]
alpha = 0.5
T = 2
times = 0, 1
n_sweeps = 4000
burn_in = 400
)";

std::string with_output(std::string text, const std::string& dir) {
  text.replace(text.find("OUT"), 3, dir);
  return text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) { return WEXITSTATUS(std::system((std::string(SBISING_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str())); }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sbising_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Config, ParsesAndRoundTrips) {
  const Config c = Config::parse_string(with_output(kCorrelation, "x"));
  EXPECT_EQ(c.kind(), ExperimentKind::Correlation);
  EXPECT_EQ(c.seed(), 5u);
  EXPECT_EQ(c.real("ising.alpha"), 0.5);
  EXPECT_EQ(c.reals("ising.times"), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(c.integer("ising.chains"), 1);
  EXPECT_EQ(c.kernel().id(), Kernel::modes({{1.0, 1.0}, {0.5, 2.0}}).id());
  const Config again = Config::parse_string(c.serialize());
  EXPECT_EQ(c, again);
  EXPECT_EQ(c.serialize(), again.serialize());
}

TEST(Config, RejectsAlphaAndLambdaTogether) {
  std::string text = with_output(kCorrelation, "x");
  text.replace(text.find("alpha = 0.5"), 11, "alpha = 0.5\nlambda = 2");
  try {
    Config::parse_string(text);
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ising.alpha/ising.lambda"), std::string::npos) << e.what();
  }
}

TEST(Config, ReportsOffendingKeys) {
  auto message = [](const std::string& text) {
    try {
      Config::parse_string(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  std::string unknown = with_output(kCorrelation, "x") + "typo = 3\n";
  EXPECT_NE(message(unknown).find("ising.typo"), std::string::npos);
  std::string missing = with_output(kCorrelation, "x");
  missing.erase(missing.find("T = 2\n"), 6);
  EXPECT_NE(message(missing).find("ising.T"), std::string::npos);
  std::string bad_number = with_output(kCorrelation, "x");
  bad_number.replace(bad_number.find("n_sweeps = 4000"), 15, "n_sweeps = many");
  EXPECT_NE(message(bad_number).find("ising.n_sweeps"), std::string::npos);
  std::string burn = with_output(kCorrelation, "x");
  burn.replace(burn.find("burn_in = 400"), 13, "burn_in = 5000");
  EXPECT_NE(message(burn).find("ising.burn_in"), std::string::npos);
  std::string schema = with_output(kCorrelation, "x");
  schema.replace(schema.find("schema = 1"), 10, "schema = 9");
  EXPECT_NE(message(schema).find("experiment.schema"), std::string::npos);
  std::string kind = with_output(kCorrelation, "x");
  kind.replace(kind.find("kind = correlation"), 18, "kind = nonsense");
  EXPECT_NE(message(kind).find("experiment.kind"), std::string::npos);
}

TEST(Config, EverySampleConfigParses) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SBISING_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(Config::load(entry.path().string())) << entry.path();
    ++count;
  }
  EXPECT_EQ(count, static_cast<int>(kind_names().size()));
}

TEST(Experiment, WritesCsvSummaryAndManifest) {
  const auto dir = scratch("write");
  const std::string text = with_output(kCorrelation, dir.string());
  const auto outcome = run_and_write(Config::parse_string(text), text);
  const std::string csv = slurp(dir / "correlation.csv");
  std::string header = csv.substr(0, csv.find('\n'));
  std::string expected;
  for (const auto& c : csv_columns()) expected += (expected.empty() ? "" : ",") + std::string(c);
  EXPECT_EQ(header, expected);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["config_sha256"], sha256_hex(text));
  EXPECT_EQ(manifest["outputs"]["correlation.csv"], sha256_hex(csv));
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir / "summary.json")).is_object());
  std::filesystem::remove_all(dir);
}

TEST(Experiment, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, SameConfigGivesIdenticalData) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    const auto cfg = scratch(dir.filename().string() + ".ini");
    std::ofstream(cfg) << with_output(kCorrelation, dir.string());
    ASSERT_EQ(run_cli("run " + cfg.string()), 0);
  }
  EXPECT_EQ(slurp(a / "correlation.csv"), slurp(b / "correlation.csv"));
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  const auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  const auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  EXPECT_EQ(ma["outputs"]["correlation.csv"], mb["outputs"]["correlation.csv"]);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("version"), 0);
  EXPECT_EQ(run_cli("kernels list"), 0);
  EXPECT_EQ(run_cli("check nonsense"), 2);
  EXPECT_EQ(run_cli("run /nonexistent/config.ini"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  const auto cfg = scratch("bad.ini");
  std::string text = with_output(kCorrelation, scratch("bad_out").string());
  text.replace(text.find("alpha = 0.5"), 11, "alpha = -1");
  std::ofstream(cfg) << text;
  EXPECT_EQ(run_cli("run " + cfg.string()), 2);
}

TEST(Cli, FreeCorrelationConfig) {
  const auto dir = scratch("free");
  std::string text = with_output(kCorrelation, dir.string());
  text.replace(text.find("alpha = 0.5"), 11, "alpha = 0");
  text.replace(text.find("n_sweeps = 4000"), 15, "n_sweeps = 40000");
  const auto cfg = scratch("free.ini");
  std::ofstream(cfg) << text;
  ASSERT_EQ(run_cli("run " + cfg.string()), 0);
  std::istringstream csv(slurp(dir / "correlation.csv"));
  std::string line;
  std::getline(csv, line);
  bool found = false;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() < 9 || f[6] != "1") continue;
    found = true;
    EXPECT_LT(std::abs(std::stod(f[7]) - std::exp(-2.0)), 3.0 * std::stod(f[8])) << line;
  }
  EXPECT_TRUE(found);
}
