#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tdsafe {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool pass() const;
};

// Property suites. Each returns one result per asserted property; the
// randomized ones take the reproducibility seed.
SuiteResult suite_projection_algebra(std::uint64_t seed);   // J-decomposition identities
SuiteResult suite_admissibility(std::uint64_t seed);        // universal controller margins
SuiteResult suite_scp(std::uint64_t seed);                  // small-control-property trend
SuiteResult suite_reaching();                               // constant-rate reaching law
SuiteResult suite_equivalent_control(std::uint64_t seed);   // sampled-data surface invariance
SuiteResult suite_ccc_fig1();                               // cruise control, delay 0.2
SuiteResult suite_ccc_fig2();                               // cruise control, delay 0.5, bands
SuiteResult suite_master_slave();                           // synchronization + obstacle
SuiteResult suite_comparison_oracle(std::uint64_t seed);    // delayed comparison principle
SuiteResult suite_integrator();                             // integration benchmarks

/// All ten suites in acceptance order.
std::vector<SuiteResult> run_acceptance(std::uint64_t seed);

/// Reads SEED from the environment (default 0).
std::uint64_t seed_from_env();

}  // namespace tdsafe
