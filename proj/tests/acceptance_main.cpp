// Acceptance harness: runs every property and scenario suite at its pinned
// tolerance and prints one line per criterion.

#include <cstdio>
#include <vector>

#include "tdsafe/selftest.hpp"

int main() {
  const std::uint64_t seed = tdsafe::seed_from_env();
  const std::vector<tdsafe::SuiteResult> suites = tdsafe::run_acceptance(seed);

  int failed = 0;
  for (const auto& suite : suites) {
    for (const auto& check : suite.checks) {
      std::printf("[%s] %s.%s measured=%.6g threshold=%.6g%s%s\n",
                  check.pass ? "PASS" : "FAIL", suite.suite.c_str(), check.name.c_str(),
                  check.measured, check.threshold, check.detail.empty() ? "" : " # ",
                  check.detail.c_str());
      if (!check.pass) ++failed;
    }
    std::printf("       %s completed in %.2f s\n", suite.suite.c_str(), suite.seconds);
  }
  if (failed == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d check(s) failed\n", failed);
  }
  return failed == 0 ? 0 : 1;
}
