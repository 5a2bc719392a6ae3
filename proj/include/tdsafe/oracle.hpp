#pragma once

#include <functional>

#include "tdsafe/dde.hpp"
#include "tdsafe/history.hpp"

namespace tdsafe {

/// Instance of the delayed comparison principle: two scalar histories
/// driven by -alpha(.) + eps * beta(sup over the trailing window), with
/// eps1 < eps2 and a shared initial history.
struct ComparisonInstance {
  std::function<double(double)> alpha;  // nondecreasing
  std::function<double(double)> beta;   // nondecreasing
  double eps1 = 0.0;
  double eps2 = 1.0;
  double delay = 0.5;
  std::function<double(double)> initial_history;  // on [-delay, 0]
  double dt = 1e-3;
  double tf = 5.0;
};

struct ComparisonOracleReport {
  bool holds = false;
  double worst_gap = 0.0;  // max over the grid of X - Y
  bool aborted = false;
};

/// Integrates the extremal equality dynamics of both members and checks
/// X(t) <= Y(t) + 1e-6 on the whole grid.
ComparisonOracleReport comparison_oracle(const ComparisonInstance& inst);

/// Closed-form reaching time |U0| / K of the constant-rate reaching law.
double reaching_oracle(double u0, double k);

}  // namespace tdsafe
