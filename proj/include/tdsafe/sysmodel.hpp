#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/history.hpp"

namespace tdsafe {

/// Counters for numerically-guarded events during a run. Shared across the
/// closures of one scenario; safe to bump from concurrent runs that share
/// nothing else.
struct RunDiagnostics {
  std::atomic<long> input_clamps{0};
  std::atomic<long> barrier_floor_hits{0};
  std::atomic<long> transversality_clamps{0};
};

/// Control-affine time-delay system xdot = f(x_t) + g(x_t) u with delay
/// bound delay_bound and optional per-coordinate input box.
struct ControlAffineDelaySystem {
  int n = 0;  // state dimension
  int m = 0;  // input dimension
  double delay_bound = 0.0;
  std::function<Eigen::VectorXd(const HistorySegment&)> drift;      // f
  std::function<Eigen::MatrixXd(const HistorySegment&)> input_map;  // g, n x m
  std::optional<Eigen::VectorXd> input_lo;  // elementwise bounds for u
  std::optional<Eigen::VectorXd> input_hi;
};

/// f(seg) + g(seg) * u. Inputs outside the box are clamped for the dynamics
/// and counted in diag; the caller's u is not modified.
Eigen::VectorXd eval_dynamics(const ControlAffineDelaySystem& sys,
                              const HistorySegment& seg, const Eigen::VectorXd& u,
                              RunDiagnostics* diag = nullptr);

/// Builds a drift functional f(phi) = F0(phi(0), phi(-tau_1), ..., phi(-tau_k))
/// from a pointwise map over the current and delayed states.
std::function<Eigen::VectorXd(const HistorySegment&)> discrete_delay_drift(
    std::vector<double> delays,
    std::function<Eigen::VectorXd(const std::vector<Eigen::VectorXd>&)> f0);

/// A scalar comparison function: class K / K-infinity (domain R+) or
/// K-bar (strictly increasing on all of R, zero at zero).
class ComparisonFunction {
 public:
  enum class Kind { kK, kKInfinity, kKBar };

  ComparisonFunction() = default;

  static ComparisonFunction linear(double k, Kind kind = Kind::kKInfinity);
  /// k * v^p on R+; for K-bar, the odd extension k * sgn(v)|v|^p.
  static ComparisonFunction power(double k, double p, Kind kind = Kind::kKInfinity);
  static ComparisonFunction log1p_scaled(double k);  // k * ln(1 + v), class K
  static ComparisonFunction custom(std::function<double(double)> forward, Kind kind,
                                   std::function<double(double)> inverse = nullptr);

  double operator()(double v) const;
  Kind kind() const { return kind_; }
  bool has_inverse() const { return static_cast<bool>(inverse_); }
  double inverse(double w) const;

 private:
  Kind kind_ = Kind::kKInfinity;
  std::function<double(double)> forward_;
  std::function<double(double)> inverse_;
};

struct ComparisonReport {
  bool monotone = false;
  bool zero_at_zero = false;
  std::vector<std::pair<double, double>> witnesses;  // adjacent grid pairs violating monotonicity
  bool ok() const { return monotone && zero_at_zero; }
};

/// Samples class-K properties of fn along a sorted grid.
ComparisonReport check_comparison(const ComparisonFunction& fn,
                                  const std::vector<double>& grid, double tol = 1e-12);

}  // namespace tdsafe
