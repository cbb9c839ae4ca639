// Command line front end: run experiments, run the acceptance battery, list
// kernels. Exit codes: 0 success, 2 configuration or usage error, 3 numerical
// failure, 4 acceptance failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "sbising/acceptance.hpp"
#include "sbising/cli/config.hpp"
#include "sbising/cli/experiment.hpp"
#include "sbising/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

int run_command(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sbising::ConfigError(path, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto config = sbising::cli::Config::parse_string(text);
  const auto outcome = sbising::cli::run_and_write(config, text);
  for (const auto& f : outcome.files) std::cout << f.string() << "\n";
  return 0;
}

int check_command(const std::string& suite, std::uint64_t seed, const std::vector<std::string>& only) {
  namespace acc = sbising::acceptance;
  acc::Options options;
  if (suite == "fast") options.suite = acc::Suite::Fast;
  else if (suite == "full") options.suite = acc::Suite::Full;
  else throw sbising::UsageError("unknown suite '" + suite + "' (expected fast or full)");
  options.seed = seed;
  options.workers = sbising::cli::effective_workers(1);
  for (const auto& id : only) {
    const auto& all = acc::criteria();
    if (std::none_of(all.begin(), all.end(), [&](const auto& c) { return c.first == id; }))
      throw sbising::UsageError("unknown criterion '" + id + "'");
  }
  bool all_passed = true;
  acc::run_suite(options, only, [&](const acc::CriterionResult& r) {
    all_passed = all_passed && r.passed;
    std::cout << acc::to_json(r).dump() << std::endl;
  });
  return all_passed ? 0 : kExitAcceptance;
}

void list_kernels() {
  std::cout << "modes      g(t) = sum_j w_j exp(-f_j |t|)          kernel.modes = w:f, w:f, ...\n"
            << "poly       g(t) = C / (1 + t^2)                   kernel.amplitude = C\n"
            << "powerlaw   omega(k) = |k|, v(k) = 1{|k|<=K} |k|^-delta in d dimensions\n"
            << "                                                  kernel.dimension, kernel.exponent, kernel.cutoff\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuum Ising / spin boson Monte Carlo laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (INI)")->required();

  std::string suite;
  std::uint64_t seed = sbising::acceptance::Options{}.seed;
  std::vector<std::string> only;
  auto* check = app.add_subcommand("check", "Run an acceptance suite and print one JSON verdict per criterion");
  check->add_option("suite", suite, "fast or full")->required();
  check->add_option("--seed", seed, "Master seed");
  check->add_option("--only", only, "Criterion ids to run (default: all)");

  auto* kernels = app.add_subcommand("kernels", "Kernel utilities");
  kernels->add_subcommand("list", "List supported kernel families");
  kernels->require_subcommand(1);

  app.add_subcommand("version", "Print the tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(config_path);
    if (*check) return check_command(suite, seed, only);
    if (*kernels) {
      list_kernels();
      return 0;
    }
    std::cout << "sbising " << sbising::kVersion << "\n";
    return 0;
  } catch (const sbising::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sbising::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sbising::ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
