// Acceptance battery: one PASS/FAIL line per criterion. Pass --full for the
// long suite, --json for machine-readable lines and --strict to make recorded
// deviations count as failures in the exit status.

#include <algorithm>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "sbising/acceptance.hpp"

namespace {

// Criteria whose failure is a documented property of the model rather than a
// defect; they are still printed as FAIL.
const std::vector<std::string> kRecordedDeviations{"C7"};

bool recorded(const std::string& id) {
  return std::find(kRecordedDeviations.begin(), kRecordedDeviations.end(), id) != kRecordedDeviations.end();
}

}  // namespace

int main(int argc, char** argv) {
  namespace acc = sbising::acceptance;
  acc::Options options;
  bool as_json = false;
  bool strict = false;
  std::vector<std::string> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--full")) options.suite = acc::Suite::Full;
    else if (!std::strcmp(argv[i], "--json")) as_json = true;
    else if (!std::strcmp(argv[i], "--strict")) strict = true;
    else only.emplace_back(argv[i]);
  }
  int passed = 0, deviations = 0, failed = 0;
  acc::run_suite(options, only, [&](const acc::CriterionResult& r) {
    const bool known = !r.passed && recorded(r.id);
    if (r.passed) ++passed;
    else if (known && !strict) ++deviations;
    else ++failed;
    if (as_json) {
      auto j = acc::to_json(r);
      j["recorded_deviation"] = known;
      std::cout << j.dump() << std::endl;
      return;
    }
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.title << ": observed " << r.observed
              << ", bound " << r.bound << ", stderr " << r.std_error << " [" << r.seconds << " s]"
              << (known ? " (recorded deviation)" : "") << "\n    " << r.detail << std::endl;
  });
  if (!as_json)
    std::cout << "summary: " << passed << " passed, " << deviations << " recorded deviations, " << failed
              << " failed" << std::endl;
  return failed == 0 ? 0 : 1;
}
