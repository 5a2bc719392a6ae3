#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/barrier.hpp"
#include "tdsafe/dde.hpp"
#include "tdsafe/smc.hpp"
#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

/// Piecewise-constant exogenous acceleration, held at the last level past
/// the end of the schedule and clamped to +-bound.
struct StepProfile {
  std::vector<double> levels{2.0, 0.0, -2.0, 0.0};
  double period = 15.0;
  double bound = 2.5;

  double operator()(double t) const;
};

/// Connected cruise control: follower/leader velocities and headway gap
/// under a delayed drag model, velocity certificate (x1 - v_d)^2 and
/// headway barrier ln(1 + 1/h), h = x3 - headway * x1.
struct CccParams {
  double mass = 1650.0;
  double a0 = 0.1, a1 = 5.0, a2 = 0.25;  // drag polynomial coefficients
  double v_desired = 22.0;
  double headway = 1.8;
  double barrier_weight = 50.0;  // weight of the barrier in the surface
  double tau = 0.2;              // reaction/communication delay
  StepProfile leader_accel;
  GainSpec gain = GainSpec::sign(5.0);
  Eigen::Vector3d xi{18.0, 22.0, 60.0};  // constant initial history
  double dt = 1e-3;
  double tf = 60.0;
  double transversality_floor = 0.05;
  int grid_refinement = 4;
};

enum class DelayLaw { kConstant, kSinusoidal };

/// Master-slave synchronization in error coordinates around moving
/// references, with the Krasovskii functional of the stacked error and a
/// gated softmin obstacle barrier on the robot positions.
struct MasterSlaveParams {
  Eigen::Matrix2d a_m = Eigen::Vector2d(1.0, 0.3).asDiagonal();
  Eigen::Matrix2d a_s = Eigen::Vector2d(0.7, 0.6).asDiagonal();
  Eigen::Matrix2d b_m = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d b_s = Eigen::Matrix2d::Identity();
  // Coupling F_m = c_mm x_m^d + c_ms x_s^d, F_s = c_ss x_s^d + c_sm x_m^d.
  Eigen::Matrix2d c_mm = Eigen::Vector2d(1.0, 0.3).asDiagonal();
  Eigen::Matrix2d c_ms = -0.5 * Eigen::Matrix2d::Identity();
  Eigen::Matrix2d c_ss = Eigen::Vector2d(0.5, 0.8).asDiagonal();
  Eigen::Matrix2d c_sm = -0.3 * Eigen::Matrix2d::Identity();
  double delta_m = 0.5;
  double delta_s = 0.2;
  Eigen::Matrix4d p1 = Eigen::Matrix4d::Identity();
  Eigen::Matrix2d p2 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d p3 = Eigen::Matrix2d::Identity();
  double eps_m = 0.84;
  double eps_s = 0.84;
  GainSpec gain = GainSpec::krasovskii(0.025);
  DelayLaw delay_law = DelayLaw::kConstant;
  double delay_omega = 1.0;  // sinusoidal law rate
  WarningGate warning_gate = WarningGate::kInsideWarning;
  Eigen::Vector4d xi{0.0, 2.0, 0.0, 2.0};  // constant initial error history
  double dt = 1e-3;
  double tf = 40.0;
  double transversality_floor = 1e-6;
  int grid_refinement = 4;

  // Reference pair and their time derivatives; paper defaults are the
  // circle 2(sin 0.3t, cos 0.3t) and its (-1, 0) translate.
  std::function<Eigen::Vector2d(double)> ref_m, dref_m, ref_s, dref_s;
  // Obstacle boundary function on positions; default (p1^2-3)^2 + p2^2 - 4.
  ScalarField obstacle_h;
  GradientField obstacle_grad;

  MasterSlaveParams();
};

struct BuiltScenario {
  ControlAffineDelaySystem sys;
  SlidingSurface surface;
  Controller controller;
  HistorySegment initial;
  double dt = 0.0;
  double tf = 0.0;
  std::vector<Channel> channels;
  std::vector<std::string> safety_channels;  // channel names carrying h values
  std::shared_ptr<RunDiagnostics> diagnostics;
};

/// Assemble the closed-loop cruise-control scenario. The initial history
/// must lie strictly inside the safe set.
BuiltScenario build_ccc(const CccParams& params);

/// Assemble the master-slave scenario in error coordinates; both robots
/// must start outside the obstacle.
BuiltScenario build_master_slave(const MasterSlaveParams& params);

/// Integrate the built scenario and record its channels.
Trajectory run_scenario(const BuiltScenario& built);

struct MetricsConfig {
  double band_lo = 21.0;
  double band_hi = 22.0;
  double residence = 10.0;       // seconds required inside the band
  double chatter_window = 10.0;  // trailing window for the chattering index
  int velocity_index = 0;        // state coordinate the band applies to
};

struct MetricsSummary {
  std::map<std::string, double> min_h;     // per safety channel
  std::optional<double> settle_time;       // first time the band holds for `residence`
  double band_residence = 0.0;             // longest in-band stretch
  double chattering_index = 0.0;           // sum |u(k+1) - u(k)| over the window
  double v_initial = 0.0, v_final = 0.0;   // V channel endpoints
};

/// Scalar summary of a recorded trajectory for acceptance assertions.
MetricsSummary metrics(const Trajectory& traj, const MetricsConfig& config,
                       const std::vector<std::string>& safety_channels);

}  // namespace tdsafe
