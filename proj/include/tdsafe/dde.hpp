#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/history.hpp"
#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

using Controller = std::function<Eigen::VectorXd(const HistorySegment&)>;

/// A named scalar diagnostic evaluated once per recorded step.
struct Channel {
  std::string name;
  std::function<double(const HistorySegment&, const Eigen::VectorXd& u)> fn;
};

/// Closed-loop simulation record. All series share the same length; times
/// start at 0 with uniform spacing dt.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // parallel to channel_names

  bool aborted = false;      // non-finite or diverging state encountered
  double abort_time = 0.0;

  const std::vector<double>& channel(const std::string& name) const;
  bool has_channel(const std::string& name) const;
  std::size_t size() const { return times.size(); }
};

struct IntegrationOptions {
  double divergence_guard = 1e9;  // abort when any |x_i| exceeds this
};

/// Fixed-step classical Runge-Kutta by the method of steps. The controller
/// is evaluated once per step on the step's start segment and held constant
/// across the stages (zero-order hold); stage segments are produced by
/// advancing the start segment with the stage state so delayed arguments
/// read interpolated history. dt must divide the system delay bound.
Trajectory integrate_closed_loop(const ControlAffineDelaySystem& sys,
                                 const Controller& controller,
                                 const HistorySegment& initial, double dt, double tf,
                                 const std::vector<Channel>& channels = {},
                                 const IntegrationOptions& options = {},
                                 RunDiagnostics* diag = nullptr);

/// Forward finite-difference surrogate of the upper Dini derivative of a
/// recorded channel at time t: (c(t+dt) - c(t)) / dt.
double dini_derivative_fd(const Trajectory& traj, const std::string& channel, double t);

}  // namespace tdsafe
