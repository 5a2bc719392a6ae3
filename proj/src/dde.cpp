#include "tdsafe/dde.hpp"

#include <cmath>
#include <stdexcept>

namespace tdsafe {
namespace {

bool finite_and_bounded(const Eigen::VectorXd& x, double guard) {
  return x.allFinite() && x.cwiseAbs().maxCoeff() <= guard;
}

// Materialize the initial condition onto the uniform dt grid so that every
// subsequent advance keeps grid points aligned with the delay breakpoints.
HistorySegment materialize(const HistorySegment& initial, double dt) {
  const double delay = initial.delay_bound();
  const long k = std::lround(delay / dt);
  std::vector<double> thetas(k + 1);
  Eigen::MatrixXd values(initial.dimension(), k + 1);
  Eigen::MatrixXd derivs;
  const bool constant = initial.is_constant();
  if (constant) derivs.setZero(initial.dimension(), k + 1);
  for (long i = 0; i <= k; ++i) {
    thetas[i] = (i == k) ? 0.0 : -delay + i * dt;
    values.col(i) = initial.eval(thetas[i]);
  }
  if (constant) {
    return HistorySegment(delay, std::move(thetas), std::move(values), std::move(derivs),
                          initial.final_time());
  }
  return HistorySegment(delay, std::move(thetas), std::move(values), initial.final_time());
}

}  // namespace

const std::vector<double>& Trajectory::channel(const std::string& name) const {
  for (size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == name) return channels[i];
  }
  throw std::invalid_argument("Trajectory: no channel named '" + name + "'");
}

bool Trajectory::has_channel(const std::string& name) const {
  for (const auto& n : channel_names) {
    if (n == name) return true;
  }
  return false;
}

Trajectory integrate_closed_loop(const ControlAffineDelaySystem& sys,
                                 const Controller& controller,
                                 const HistorySegment& initial, double dt, double tf,
                                 const std::vector<Channel>& channels,
                                 const IntegrationOptions& options, RunDiagnostics* diag) {
  if (dt <= 0.0) throw std::invalid_argument("integrate_closed_loop: dt must be > 0");
  if (tf < dt) throw std::invalid_argument("integrate_closed_loop: tf must be >= dt");
  if (initial.dimension() != sys.n) {
    throw std::invalid_argument("integrate_closed_loop: initial segment dimension != n");
  }
  const long k = std::lround(sys.delay_bound / dt);
  if (k < 1 || std::abs(k * dt - sys.delay_bound) > 1e-9) {
    throw std::invalid_argument("integrate_closed_loop: dt must divide the delay bound");
  }

  Trajectory traj;
  traj.dt = dt;
  const long steps = std::lround(tf / dt);
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.inputs.reserve(steps + 1);
  traj.channel_names.reserve(channels.size());
  traj.channels.assign(channels.size(), {});
  for (const auto& ch : channels) traj.channel_names.push_back(ch.name);

  HistorySegment seg = materialize(initial, dt);
  auto record = [&](double t, const Eigen::VectorXd& u) {
    traj.times.push_back(t);
    traj.states.push_back(seg.current());
    traj.inputs.push_back(u);
    for (size_t c = 0; c < channels.size(); ++c) {
      traj.channels[c].push_back(channels[c].fn(seg, u));
    }
  };

  for (long i = 0; i < steps; ++i) {
    const double t = i * dt;
    const Eigen::VectorXd u = controller(seg);
    record(t, u);

    const Eigen::VectorXd x = seg.current();
    const Eigen::VectorXd k1 = eval_dynamics(sys, seg, u, diag);
    const Eigen::VectorXd k2 =
        eval_dynamics(sys, seg.advance({{0.5 * dt, x + 0.5 * dt * k1}}, {k1}), u, diag);
    const Eigen::VectorXd k3 =
        eval_dynamics(sys, seg.advance({{0.5 * dt, x + 0.5 * dt * k2}}, {k2}), u, diag);
    const Eigen::VectorXd k4 =
        eval_dynamics(sys, seg.advance({{dt, x + dt * k3}}, {k3}), u, diag);
    const Eigen::VectorXd x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!finite_and_bounded(x_next, options.divergence_guard)) {
      traj.aborted = true;
      traj.abort_time = t + dt;
      return traj;
    }
    // k4 is the dense-output slope at the step end under this step's input.
    seg = seg.advance({{dt, x_next}}, {k4});
  }
  record(steps * dt, controller(seg));
  return traj;
}

double dini_derivative_fd(const Trajectory& traj, const std::string& channel, double t) {
  const auto& series = traj.channel(channel);
  const long i = std::lround(t / traj.dt);
  if (i < 0 || std::abs(i * traj.dt - t) > 1e-9) {
    throw std::domain_error("dini_derivative_fd: t is not a recorded sample time");
  }
  if (static_cast<size_t>(i + 1) >= series.size()) {
    throw std::domain_error("dini_derivative_fd: t + dt is outside the trajectory");
  }
  return (series[i + 1] - series[i]) / traj.dt;
}

}  // namespace tdsafe
