#include "tdsafe/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

ComparisonOracleReport comparison_oracle(const ComparisonInstance& inst) {
  if (!(inst.eps2 > inst.eps1)) {
    throw std::invalid_argument("comparison_oracle: eps2 must exceed eps1");
  }
  if (inst.eps1 < 0.0 || inst.eps2 > 1.0) {
    throw std::invalid_argument("comparison_oracle: eps values must lie in [0, 1]");
  }
  if (!inst.alpha || !inst.beta || !inst.initial_history) {
    throw std::invalid_argument("comparison_oracle: incomplete instance");
  }

  // Stack X and Y into one 2-state delay system; each component sees the
  // sup of its own trailing window.
  ControlAffineDelaySystem sys;
  sys.n = 2;
  sys.m = 1;
  sys.delay_bound = inst.delay;
  sys.drift = [&inst](const HistorySegment& seg) {
    const Eigen::VectorXd x = seg.current();
    const double sup_x = seg.sup_transform([](const Eigen::VectorXd& v) { return v(0); });
    const double sup_y = seg.sup_transform([](const Eigen::VectorXd& v) { return v(1); });
    Eigen::Vector2d dx;
    dx(0) = -inst.alpha(x(0)) + inst.eps1 * inst.beta(sup_x);
    dx(1) = -inst.alpha(x(1)) + inst.eps2 * inst.beta(sup_y);
    return Eigen::VectorXd(dx);
  };
  sys.input_map = [](const HistorySegment&) { return Eigen::MatrixXd::Zero(2, 1); };

  HistorySegment xi = HistorySegment::sample(
      inst.delay, 2,
      [&inst](double theta) {
        return Eigen::VectorXd(Eigen::Vector2d::Constant(inst.initial_history(theta)));
      },
      inst.dt);
  Controller zero = [](const HistorySegment&) { return Eigen::VectorXd::Zero(1); };
  const Trajectory traj = integrate_closed_loop(sys, zero, xi, inst.dt, inst.tf);

  ComparisonOracleReport report;
  report.aborted = traj.aborted;
  report.worst_gap = -std::numeric_limits<double>::infinity();
  for (const auto& state : traj.states) {
    report.worst_gap = std::max(report.worst_gap, state(0) - state(1));
  }
  report.holds = !traj.aborted && report.worst_gap <= 1e-6;
  return report;
}

double reaching_oracle(double u0, double k) {
  if (k <= 0.0) throw std::invalid_argument("reaching_oracle: K must be > 0");
  return std::abs(u0) / k;
}

}  // namespace tdsafe
