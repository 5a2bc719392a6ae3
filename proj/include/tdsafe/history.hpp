#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tdsafe {

/// A sampled history segment phi: [-delay, 0] -> R^n, the trailing state
/// window every functional in this library operates on. Immutable after
/// construction; advance() returns a new segment with the window shifted
/// forward in time.
///
/// Samples are stored at strictly increasing offsets theta with the first
/// at -delay and the last at 0. A single-sample segment is the constant
/// history phi == value. When per-sample derivatives are available
/// (supplied by the integrator), evaluation uses cubic Hermite
/// interpolation between samples; otherwise linear.
class HistorySegment {
 public:
  /// Scalar zero history with unit delay; placeholder for containers.
  HistorySegment() : HistorySegment(1.0, Eigen::VectorXd::Zero(1)) {}

  /// Constant history phi == value on [-delay, 0].
  HistorySegment(double delay_bound, Eigen::VectorXd constant_value,
                 double final_time = 0.0);

  /// Sampled history. values.col(i) is the state at thetas[i].
  HistorySegment(double delay_bound, std::vector<double> thetas,
                 Eigen::MatrixXd values, double final_time = 0.0);

  /// Sampled history with per-sample time derivatives (enables Hermite
  /// interpolation between samples).
  HistorySegment(double delay_bound, std::vector<double> thetas,
                 Eigen::MatrixXd values, Eigen::MatrixXd derivatives,
                 double final_time = 0.0);

  /// Samples a function segment onto a uniform grid of spacing dt.
  /// dt must divide delay_bound to within 1e-9.
  static HistorySegment sample(double delay_bound, int dimension,
                               const std::function<Eigen::VectorXd(double)>& phi,
                               double dt, double final_time = 0.0);

  double delay_bound() const { return delay_; }
  int dimension() const { return static_cast<int>(values_.rows()); }
  bool is_constant() const { return values_.cols() == 1; }
  bool has_derivatives() const { return derivs_.has_value(); }

  /// Absolute time of the right endpoint (theta = 0). The segment
  /// represents x_t with t = final_time(); scenario functionals that carry
  /// explicit time dependence (reference trajectories, exogenous signals)
  /// read it from here.
  double final_time() const { return final_time_; }
  HistorySegment with_final_time(double t) const;

  /// phi(theta), theta in [-delay, 0]. Exact at stored samples.
  Eigen::VectorXd eval(double theta) const;

  /// phi(0), the current state.
  Eigen::VectorXd current() const { return values_.col(values_.cols() - 1); }

  /// sup norm over the evaluation grid: max |phi(theta)| (Euclidean).
  /// refinement = number of subintervals per sample gap used to probe
  /// interpolant extrema.
  double sup_norm(int refinement = kDefaultRefinement) const;

  /// max over the evaluation grid of scalar_map(phi(theta)). The grid is
  /// the stored samples plus `refinement` subdivisions per gap; a finite
  /// surrogate for the supremum over the continuum.
  double sup_transform(const std::function<double(const Eigen::VectorXd&)>& scalar_map,
                       int refinement = kDefaultRefinement) const;

  /// Composite trapezoid of scalar_map(phi(s)) ds over [from_theta, 0] on
  /// the sample grid. from_theta defaults to -delay.
  double trapezoid(const std::function<double(const Eigen::VectorXd&)>& scalar_map,
                   std::optional<double> from_theta = std::nullopt) const;

  bool is_zero(double tol = 0.0) const;

  /// Slides the window forward so that it ends at the last tail time.
  /// Tail times must be increasing and > 0; samples that fall out of the
  /// window are dropped and a sample is synthesized at exactly -delay when
  /// needed. A gap wider than the delay window (between the old head and
  /// the tail, or inside the tail) cannot be bridged and raises an error.
  HistorySegment advance(const std::vector<std::pair<double, Eigen::VectorXd>>& tail) const;
  HistorySegment advance(const std::vector<std::pair<double, Eigen::VectorXd>>& tail,
                         const std::vector<Eigen::VectorXd>& tail_derivatives) const;

  /// Copy with phi(0) replaced (used by finite-difference probes of
  /// head-dependent functionals).
  HistorySegment with_current(const Eigen::VectorXd& x) const;

  /// Constant segment holding x, same delay bound and final time.
  HistorySegment constant_like(const Eigen::VectorXd& x) const;

  const std::vector<double>& thetas() const { return thetas_; }
  const Eigen::MatrixXd& values() const { return values_; }

  static constexpr int kDefaultRefinement = 4;

 private:
  void validate() const;
  Eigen::VectorXd interpolate(int interval, double theta) const;
  void interpolate_into(int interval, double theta, Eigen::VectorXd& out) const;

  double delay_ = 0.0;
  double final_time_ = 0.0;
  std::vector<double> thetas_;
  Eigen::MatrixXd values_;                  // n x k
  std::optional<Eigen::MatrixXd> derivs_;   // n x k, same layout
};

}  // namespace tdsafe
