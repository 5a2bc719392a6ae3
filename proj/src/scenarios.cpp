#include "tdsafe/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace tdsafe {
namespace {

constexpr double kBarrierFloor = 1e-12;

double floored(double h, RunDiagnostics* diag) {
  if (h < kBarrierFloor) {
    if (diag) ++diag->barrier_floor_hits;
    return kBarrierFloor;
  }
  return h;
}

void require_divides(double delay, double dt, const char* what) {
  const long k = std::lround(delay / dt);
  if (k < 1 || std::abs(k * dt - delay) > 1e-9) {
    throw std::invalid_argument(std::string("scenario setup: dt must divide ") + what);
  }
}

}  // namespace

double StepProfile::operator()(double t) const {
  if (levels.empty()) return 0.0;
  size_t idx = period > 0.0 ? static_cast<size_t>(std::max(0.0, t) / period) : 0;
  if (idx >= levels.size()) idx = levels.size() - 1;
  return std::clamp(levels[idx], -bound, bound);
}

BuiltScenario build_ccc(const CccParams& params) {
  if (params.mass <= 0.0) throw std::invalid_argument("build_ccc: mass must be > 0");
  if (params.tau <= 0.0) throw std::invalid_argument("build_ccc: delay must be > 0");
  require_divides(params.tau, params.dt, "the delay");
  for (double level : params.leader_accel.levels) {
    if (std::abs(level) > params.leader_accel.bound + 1e-12) {
      throw std::invalid_argument("build_ccc: leader acceleration exceeds its bound");
    }
  }

  auto diag = std::make_shared<RunDiagnostics>();
  const double mass = params.mass, a0 = params.a0, a1 = params.a1, a2 = params.a2;
  auto drag = [mass, a0, a1, a2](double v) { return (a0 + a1 * v + a2 * v * v) / mass; };

  ControlAffineDelaySystem sys;
  sys.n = 3;
  sys.m = 1;
  sys.delay_bound = params.tau;
  sys.drift = [drag, leader = params.leader_accel, tau = params.tau](const HistorySegment& seg) {
    const Eigen::VectorXd now = seg.current();
    const Eigen::VectorXd delayed = seg.eval(-tau);
    Eigen::Vector3d f;
    f(0) = drag(delayed(0)) - drag(now(0));
    f(1) = leader(seg.final_time());
    f(2) = now(1) - now(0);
    return Eigen::VectorXd(f);
  };
  sys.input_map = [](const HistorySegment&) {
    Eigen::MatrixXd g(3, 1);
    g << 1.0, 0.0, 0.0;
    return g;
  };

  const double vd = params.v_desired;
  ScalarField lyap_v = [vd](const Eigen::VectorXd& x) { return (x(0) - vd) * (x(0) - vd); };
  GradientField lyap_grad = [vd](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(Eigen::Vector3d(2.0 * (x(0) - vd), 0.0, 0.0));
  };

  const double headway = params.headway;
  ScalarField h_fn = [headway](const Eigen::VectorXd& x) { return x(2) - headway * x(0); };
  GradientField h_grad = [headway](const Eigen::VectorXd& x) {
    (void)x;
    return Eigen::VectorXd(Eigen::Vector3d(-headway, 0.0, 1.0));
  };
  ScalarField barrier_b = [h_fn, diag](const Eigen::VectorXd& x) {
    return std::log1p(1.0 / floored(h_fn(x), diag.get()));
  };
  GradientField barrier_grad = [h_fn, h_grad, diag](const Eigen::VectorXd& x) {
    const double h = floored(h_fn(x), diag.get());
    return Eigen::VectorXd(-h_grad(x) / (h * (h + 1.0)));
  };

  HistorySegment initial(params.tau, params.xi);
  if (h_fn(params.xi) <= 0.0) {
    throw std::invalid_argument("build_ccc: initial history must lie inside the safe set");
  }

  const double weight = params.barrier_weight;
  SlidingSurface surface = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [weight](double b) { return weight * b; },
                         [weight](double) { return weight; }),
      SurfacePart::from_state(lyap_v, lyap_grad),
      SurfacePart::from_state(barrier_b, barrier_grad));

  SmcOptions options;
  options.transversality_floor = params.transversality_floor;
  options.refinement = params.grid_refinement;

  BuiltScenario built;
  built.sys = sys;
  built.surface = surface;
  built.controller = make_smc_controller(surface, sys, params.gain, options, diag);
  built.initial = initial;
  built.dt = params.dt;
  built.tf = params.tf;
  built.diagnostics = diag;
  built.channels = {
      {"U", [surface](const HistorySegment& seg, const Eigen::VectorXd&) { return surface.value(seg); }},
      {"W", [surface](const HistorySegment& seg, const Eigen::VectorXd&) { return surface.reaching_value(seg); }},
      {"V", [lyap_v](const HistorySegment& seg, const Eigen::VectorXd&) { return lyap_v(seg.current()); }},
      {"B", [barrier_b](const HistorySegment& seg, const Eigen::VectorXd&) { return barrier_b(seg.current()); }},
      {"h_r", [h_fn](const HistorySegment& seg, const Eigen::VectorXd&) { return h_fn(seg.current()); }},
  };
  built.safety_channels = {"h_r"};
  return built;
}

MasterSlaveParams::MasterSlaveParams() {
  ref_m = [](double t) { return Eigen::Vector2d(2.0 * std::sin(0.3 * t), 2.0 * std::cos(0.3 * t)); };
  dref_m = [](double t) { return Eigen::Vector2d(0.6 * std::cos(0.3 * t), -0.6 * std::sin(0.3 * t)); };
  ref_s = [this](double t) { return Eigen::Vector2d(ref_m(t) - Eigen::Vector2d(1.0, 0.0)); };
  dref_s = [this](double t) { return dref_m(t); };
  obstacle_h = [](const Eigen::VectorXd& p) {
    const double q = p(0) * p(0) - 3.0;
    return q * q + p(1) * p(1) - 4.0;
  };
  obstacle_grad = [](const Eigen::VectorXd& p) {
    return Eigen::VectorXd(Eigen::Vector2d(4.0 * p(0) * (p(0) * p(0) - 3.0), 2.0 * p(1)));
  };
}

BuiltScenario build_master_slave(const MasterSlaveParams& p) {
  if (p.delta_m <= 0.0 || p.delta_s <= 0.0) {
    throw std::invalid_argument("build_master_slave: delay bounds must be > 0");
  }
  const double delay = std::max(p.delta_m, p.delta_s);
  require_divides(p.delta_m, p.dt, "the master delay bound");
  require_divides(p.delta_s, p.dt, "the slave delay bound");

  auto diag = std::make_shared<RunDiagnostics>();

  // Delay laws; the functional certificate always uses the bounds.
  auto tau_m = [p](double t) {
    return p.delay_law == DelayLaw::kConstant
               ? p.delta_m
               : p.delta_m * (0.5 + 0.5 * std::sin(p.delay_omega * t));
  };
  auto tau_s = [p](double t) {
    return p.delay_law == DelayLaw::kConstant
               ? p.delta_s
               : p.delta_s * (0.5 + 0.5 * std::sin(p.delay_omega * t));
  };

  ControlAffineDelaySystem sys;
  sys.n = 4;
  sys.m = 4;
  sys.delay_bound = delay;
  sys.drift = [p, tau_m, tau_s](const HistorySegment& seg) {
    const double t = seg.final_time();
    const Eigen::VectorXd e = seg.current();
    const double dm = std::min(tau_m(t), seg.delay_bound());
    const double ds = std::min(tau_s(t), seg.delay_bound());
    const Eigen::VectorXd e_dm = seg.eval(-dm);
    const Eigen::VectorXd e_ds = seg.eval(-ds);
    const Eigen::Vector2d xm_d = e_dm.head<2>() + p.ref_m(t - dm);
    const Eigen::Vector2d xs_d = e_ds.tail<2>() + p.ref_s(t - ds);
    Eigen::VectorXd f(4);
    f.head<2>() = p.a_m * (e.head<2>() + p.ref_m(t)) + p.c_mm * xm_d + p.c_ms * xs_d - p.dref_m(t);
    f.tail<2>() = p.a_s * (e.tail<2>() + p.ref_s(t)) + p.c_ss * xs_d + p.c_sm * xm_d - p.dref_s(t);
    return f;
  };
  sys.input_map = [p](const HistorySegment&) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 4);
    g.topLeftCorner<2, 2>() = p.b_m;
    g.bottomRightCorner<2, 2>() = p.b_s;
    return g;
  };

  // Krasovskii side: e'P1 e + windowed quadratic memories of each error.
  auto quad_m = [p](const Eigen::VectorXd& e) {
    return (e.head<2>().transpose() * p.p2 * e.head<2>()).value();
  };
  auto quad_s = [p](const Eigen::VectorXd& e) {
    return (e.tail<2>().transpose() * p.p3 * e.tail<2>()).value();
  };
  KrasovskiiCertificate lyap;
  lyap.v1 = [p](const Eigen::VectorXd& e) { return (e.transpose() * p.p1 * e).value(); };
  lyap.grad_v1 = [p](const Eigen::VectorXd& e) { return Eigen::VectorXd(2.0 * p.p1 * e); };
  lyap.v2 = [p, quad_m, quad_s](const HistorySegment& seg) {
    return seg.trapezoid(quad_m, -p.delta_m) + seg.trapezoid(quad_s, -p.delta_s);
  };
  lyap.dplus_v2 = [p, quad_m, quad_s](const HistorySegment& seg) {
    const Eigen::VectorXd now = seg.current();
    return quad_m(now) - quad_m(seg.eval(-p.delta_m)) + quad_s(now) - quad_s(seg.eval(-p.delta_s));
  };
  lyap.alpha1 = ComparisonFunction::power(1.0, 2.0);
  lyap.alpha2 = ComparisonFunction::power(1.0 + p.delta_m + p.delta_s, 2.0);
  lyap.gamma_lk = ComparisonFunction::linear(1.0);

  // Barrier side: softmin of the per-robot obstacle clearances at the
  // reference-shifted positions. Time enters through the references, so the
  // explicit time derivative goes into the tail term.
  auto positions = [p](const HistorySegment& seg, const Eigen::VectorXd& e) {
    const double t = seg.final_time();
    return std::pair<Eigen::Vector2d, Eigen::Vector2d>(e.head<2>() + p.ref_m(t),
                                                       e.tail<2>() + p.ref_s(t));
  };
  auto softmin_at = [p, positions, diag](const HistorySegment& seg, const Eigen::VectorXd& e) {
    const auto [pm, ps] = positions(seg, e);
    return softmin_eval({p.obstacle_h(pm), p.obstacle_h(ps)}, {p.eps_m, p.eps_s}, p.warning_gate,
                        diag.get());
  };

  SurfacePart barrier_part;
  barrier_part.value = [softmin_at](const HistorySegment& seg) {
    return softmin_at(seg, seg.current()).value;
  };
  barrier_part.head_gradient = [p, positions, softmin_at](const HistorySegment& seg) {
    const Eigen::VectorXd e = seg.current();
    const auto [pm, ps] = positions(seg, e);
    const SoftminEval sm = softmin_at(seg, e);
    Eigen::VectorXd grad(4);
    grad.head<2>() = sm.dvalue_dh[0] * p.obstacle_grad(pm);
    grad.tail<2>() = sm.dvalue_dh[1] * p.obstacle_grad(ps);
    return grad;
  };
  barrier_part.tail_derivative = [p, positions, softmin_at](const HistorySegment& seg) {
    const double t = seg.final_time();
    const Eigen::VectorXd e = seg.current();
    const auto [pm, ps] = positions(seg, e);
    const SoftminEval sm = softmin_at(seg, e);
    return sm.dvalue_dh[0] * p.obstacle_grad(pm).dot(p.dref_m(t)) +
           sm.dvalue_dh[1] * p.obstacle_grad(ps).dot(p.dref_s(t));
  };

  SlidingSurface surface = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double b) { return b; }, [](double) { return 1.0; }),
      SurfacePart::from_certificate(lyap), barrier_part);

  HistorySegment initial(delay, p.xi);
  // Both robots must start clear of the obstacle along the whole window.
  for (double theta = -delay; theta <= 1e-12; theta += p.dt) {
    const Eigen::VectorXd e = initial.eval(std::min(theta, 0.0));
    if (p.obstacle_h(e.head<2>() + p.ref_m(theta)) <= 0.0 ||
        p.obstacle_h(e.tail<2>() + p.ref_s(theta)) <= 0.0) {
      throw std::invalid_argument("build_master_slave: a robot starts inside the obstacle");
    }
  }

  SmcOptions options;
  options.transversality_floor = p.transversality_floor;
  options.refinement = p.grid_refinement;

  auto lyap_value = [lyap](const HistorySegment& seg) { return lyap.value(seg); };
  auto h_m = [p, positions](const HistorySegment& seg) {
    return p.obstacle_h(positions(seg, seg.current()).first);
  };
  auto h_s = [p, positions](const HistorySegment& seg) {
    return p.obstacle_h(positions(seg, seg.current()).second);
  };

  BuiltScenario built;
  built.sys = sys;
  built.surface = surface;
  built.controller = make_smc_controller(surface, sys, p.gain, options, diag);
  built.initial = initial;
  built.dt = p.dt;
  built.tf = p.tf;
  built.diagnostics = diag;
  built.channels = {
      {"U", [surface](const HistorySegment& seg, const Eigen::VectorXd&) { return surface.value(seg); }},
      {"W", [surface](const HistorySegment& seg, const Eigen::VectorXd&) { return surface.reaching_value(seg); }},
      {"V", [lyap_value](const HistorySegment& seg, const Eigen::VectorXd&) { return lyap_value(seg); }},
      {"B", [barrier_part](const HistorySegment& seg, const Eigen::VectorXd&) { return barrier_part.value(seg); }},
      {"h_m", [h_m](const HistorySegment& seg, const Eigen::VectorXd&) { return h_m(seg); }},
      {"h_s", [h_s](const HistorySegment& seg, const Eigen::VectorXd&) { return h_s(seg); }},
      {"e_norm", [](const HistorySegment& seg, const Eigen::VectorXd&) { return seg.current().norm(); }},
  };
  built.safety_channels = {"h_m", "h_s"};
  return built;
}

Trajectory run_scenario(const BuiltScenario& built) {
  return integrate_closed_loop(built.sys, built.controller, built.initial, built.dt, built.tf,
                               built.channels, {}, built.diagnostics.get());
}

MetricsSummary metrics(const Trajectory& traj, const MetricsConfig& config,
                       const std::vector<std::string>& safety_channels) {
  if (traj.size() == 0) throw std::invalid_argument("metrics: empty trajectory");
  MetricsSummary summary;
  for (const auto& name : safety_channels) {
    const auto& series = traj.channel(name);
    summary.min_h[name] = *std::min_element(series.begin(), series.end());
  }

  // Band residence: longest stretch with the velocity coordinate in band,
  // settle time = start of the first stretch at least `residence` long.
  const int vi = config.velocity_index;
  double run_start = 0.0;
  bool in_band = false;
  double longest = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    const double v = traj.states[i](vi);
    const bool inside = v >= config.band_lo && v <= config.band_hi;
    if (inside && !in_band) {
      in_band = true;
      run_start = traj.times[i];
    }
    const bool ends_run = (!inside && in_band) || (inside && i + 1 == traj.size());
    if (ends_run) {
      const double end = inside ? traj.times[i] : traj.times[i - 1];
      const double length = end - run_start;
      longest = std::max(longest, length);
      if (length >= config.residence && !summary.settle_time) summary.settle_time = run_start;
      in_band = false;
    }
  }
  summary.band_residence = longest;

  const double t_end = traj.times.back();
  double chatter = 0.0;
  for (size_t i = 0; i + 1 < traj.size(); ++i) {
    if (traj.times[i] >= t_end - config.chatter_window) {
      chatter += (traj.inputs[i + 1] - traj.inputs[i]).norm();
    }
  }
  summary.chattering_index = chatter;

  if (traj.has_channel("V")) {
    const auto& v = traj.channel("V");
    summary.v_initial = v.front();
    summary.v_final = v.back();
  }
  return summary;
}

}  // namespace tdsafe
