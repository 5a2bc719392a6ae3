#include <doctest.h>

#include <cmath>
#include <random>

#include "tdsafe/smc.hpp"

using namespace tdsafe;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }

ControlAffineDelaySystem fixed_system(VectorXd f, MatrixXd g) {
  ControlAffineDelaySystem sys;
  sys.n = static_cast<int>(f.size());
  sys.m = static_cast<int>(g.cols());
  sys.delay_bound = 1.0;
  sys.drift = [f](const HistorySegment&) { return f; };
  sys.input_map = [g](const HistorySegment&) { return g; };
  return sys;
}

SurfacePart identity_part() {
  return SurfacePart::from_state([](const VectorXd& x) { return x(0); },
                                 [](const VectorXd&) { return VectorXd(VectorXd::Ones(1)); });
}

SlidingSurface scalar_surface() {
  return SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }),
      identity_part(), SurfacePart::zero(1));
}

}  // namespace

TEST_CASE("sign conventions") {
  CHECK(sgn(3.0) == 1.0);
  CHECK(sgn(-0.1) == -1.0);
  CHECK(sgn(0.0) == 0.0);
  CHECK(psgn(0.0) == 1.0);
  CHECK(psgn(-1e-12) == 0.0);
}

TEST_CASE("j decomposition worked example") {
  VectorXd f(2);
  f << 1.0, 0.0;
  MatrixXd g(2, 1);
  g << 0.0, 1.0;
  auto sys = fixed_system(f, g);
  HistorySegment seg(1.0, VectorXd::Zero(2));
  RowVectorXd H(2);
  H << 0.0, 1.0;

  const JDecomposition jd = j_decomposition(sys, seg, H);
  MatrixXd expected_m(2, 2);
  expected_m << 1.0, 0.0, 0.0, 0.0;
  CHECK((jd.M - expected_m).norm() <= 1e-12);

  MatrixXd expected_j1(2, 2);
  expected_j1 << 0.0, 1.0, -1.0, 0.0;
  CHECK((jd.J1 - expected_j1).norm() <= 1e-12);
  CHECK((jd.M * f - jd.J1 * H.transpose()).norm() <= 1e-12);

  MatrixXd expected_j2(2, 2);
  expected_j2 << 0.0, -0.5, 0.5, 0.0;
  MatrixXd expected_j3(2, 2);
  expected_j3 << 0.0, 0.5, 0.5, 0.0;
  CHECK((jd.J2 - expected_j2).norm() <= 1e-12);
  CHECK((jd.J3 - expected_j3).norm() <= 1e-12);
  CHECK((f - (jd.J3 - jd.J2) * H.transpose()).norm() <= 1e-12);
}

TEST_CASE("j decomposition rejects tangent input directions") {
  VectorXd f(2);
  f << 1.0, 0.0;
  MatrixXd g(2, 1);
  g << 0.0, 1.0;
  auto sys = fixed_system(f, g);
  HistorySegment seg(1.0, VectorXd::Zero(2));
  RowVectorXd H(2);
  H << 1.0, 0.0;  // H g = 0
  CHECK_THROWS_AS(j_decomposition(sys, seg, H), TransversalityError);
}

TEST_CASE("projection identities on random instances") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> n_dist(1, 5), m_dist(1, 3);
  int done = 0;
  while (done < 50) {
    const int n = n_dist(rng), m = m_dist(rng);
    VectorXd f = VectorXd::NullaryExpr(n, [&]() { return coef(rng); });
    MatrixXd g = MatrixXd::NullaryExpr(n, m, [&]() { return coef(rng); });
    RowVectorXd H = RowVectorXd::NullaryExpr(n, [&]() { return coef(rng); });
    if ((H * g).norm() < 1e-3) continue;
    ++done;
    auto sys = fixed_system(f, g);
    HistorySegment seg(1.0, VectorXd::Zero(n));
    const JDecomposition jd = j_decomposition(sys, seg, H);
    CHECK((jd.J2 + jd.J2.transpose()).norm() <= 1e-9 * std::max(1.0, jd.J2.norm()));
    CHECK((jd.J3 - jd.J3.transpose()).norm() <= 1e-9 * std::max(1.0, jd.J3.norm()));
    CHECK((jd.J1 + 2.0 * jd.J2).norm() <= 1e-9);
    CHECK((jd.M * f - jd.J1 * H.transpose()).norm() <= 1e-9 * std::max(1.0, f.norm()));
    CHECK((f - (jd.J3 - jd.J2) * H.transpose()).norm() <= 1e-9 * std::max(1.0, f.norm()));
    CHECK(std::abs((H * jd.J1 * H.transpose()).value()) <= 1e-9 * std::max(1.0, H.squaredNorm()));
    // The closed-form H J3 H^T = H f identity the control law relies on.
    CHECK((H * jd.J3 * H.transpose()).value() ==
          doctest::Approx(H.dot(f)).epsilon(1e-9));
  }
}

TEST_CASE("surface evaluation: linear and additive combiners") {
  auto constant_part = [](double c) {
    return SurfacePart::from_state([c](const VectorXd&) { return c; },
                                   [](const VectorXd&) {
                                     return VectorXd(VectorXd::Zero(1));
                                   });
  };
  auto linear = SlidingSurface::combine(Combiner::linear(1.0, 1.0, 1e-9), constant_part(3.0),
                                        constant_part(3.0));
  HistorySegment seg(1.0, vec1(0.0));
  CHECK(linear.value(seg) == doctest::Approx(0.0));

  auto lyap_only = scalar_surface();
  HistorySegment at2(1.0, vec1(2.0));
  CHECK(lyap_only.value(at2) == doctest::Approx(2.0));
  CHECK(lyap_only.reaching_value(at2) == doctest::Approx(2.0));
}

TEST_CASE("surface terms: state certificate over a delayed drift") {
  // V = x^2 as the lyapunov side, no barrier, f(phi) = phi(-1), g = 1.
  ControlAffineDelaySystem sys;
  sys.n = 1;
  sys.m = 1;
  sys.delay_bound = 1.0;
  sys.drift = [](const HistorySegment& seg) { return VectorXd(seg.eval(-1.0)); };
  sys.input_map = [](const HistorySegment&) { return MatrixXd::Ones(1, 1); };

  auto surface = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }),
      SurfacePart::from_state([](const VectorXd& x) { return x(0) * x(0); },
                              [](const VectorXd& x) { return VectorXd(2.0 * x); }),
      SurfacePart::zero(1));

  HistorySegment seg(1.0, vec1(1.0));
  const SurfaceTerms terms = surface.terms(sys, seg);
  CHECK(terms.H(0) == doctest::Approx(2.0));
  CHECK(terms.F == doctest::Approx(2.0));
  CHECK(terms.G(0) == doctest::Approx(2.0));
  CHECK(terms.L == doctest::Approx(0.0));
}

TEST_CASE("surface terms: constant surface has zero terms") {
  auto surface = SlidingSurface::combine(
      Combiner::custom([](double, double) { return 42.0; }, [](double, double) { return 0.0; },
                       [](double, double) { return 0.0; }),
      identity_part(), SurfacePart::zero(1));
  auto sys = fixed_system(vec1(1.0), MatrixXd::Ones(1, 1));
  HistorySegment seg(1.0, vec1(2.0));
  const SurfaceTerms terms = surface.terms(sys, seg);
  CHECK(terms.H.norm() == 0.0);
  CHECK(terms.F == 0.0);
  CHECK(terms.G.norm() == 0.0);
  CHECK(terms.L == 0.0);
}

TEST_CASE("surface terms: functional tail feeds L") {
  // Krasovskii side with V2 = integral of |phi|^2: the invariant derivative
  // contributes |phi(0)|^2 - |phi(-delta)|^2 to L.
  KrasovskiiCertificate cert;
  cert.v1 = [](const VectorXd& x) { return x(0) * x(0); };
  cert.grad_v1 = [](const VectorXd& x) { return VectorXd(2.0 * x); };
  cert.v2 = [](const HistorySegment& seg) {
    return seg.trapezoid([](const VectorXd& v) { return v.squaredNorm(); });
  };
  cert.dplus_v2 = [](const HistorySegment& seg) {
    return seg.current().squaredNorm() - seg.eval(-1.0).squaredNorm();
  };
  cert.alpha1 = ComparisonFunction::power(1.0, 2.0);
  cert.alpha2 = ComparisonFunction::power(2.0, 2.0);
  cert.gamma_lk = ComparisonFunction::linear(1.0);

  auto surface = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }),
      SurfacePart::from_certificate(cert), SurfacePart::zero(1));

  Eigen::MatrixXd vals(1, 2);
  vals << 2.0, 1.0;  // phi(-1) = 2, phi(0) = 1
  HistorySegment seg(1.0, {-1.0, 0.0}, vals);
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  const SurfaceTerms terms = surface.terms(sys, seg);
  CHECK(terms.L == doctest::Approx(-3.0));
  CHECK_FALSE(surface.state_based());
}

TEST_CASE("equivalent control worked values") {
  HistorySegment seg(1.0, VectorXd::Zero(2));

  // H f = 0: nothing to cancel.
  {
    VectorXd f(2);
    f << 1.0, 0.0;
    MatrixXd g(2, 1);
    g << 0.0, 1.0;
    auto surface = SlidingSurface::combine(
        Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                           [](double) { return 0.0; }, [](double) { return 0.0; }),
        SurfacePart::from_state([](const VectorXd& x) { return x(1); },
                                [](const VectorXd&) {
                                  return VectorXd(Eigen::Vector2d(0.0, 1.0));
                                }),
        SurfacePart::zero(2));
    CHECK(equivalent_control(surface, fixed_system(f, g), seg).norm() <= 1e-12);
  }

  // H f = 1 with unit input direction: cancelled exactly.
  {
    VectorXd f(2);
    f << 0.0, 1.0;
    MatrixXd g(2, 1);
    g << 0.0, 1.0;
    auto surface = SlidingSurface::combine(
        Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                           [](double) { return 0.0; }, [](double) { return 0.0; }),
        SurfacePart::from_state([](const VectorXd& x) { return x(1); },
                                [](const VectorXd&) {
                                  return VectorXd(Eigen::Vector2d(0.0, 1.0));
                                }),
        SurfacePart::zero(2));
    CHECK(equivalent_control(surface, fixed_system(f, g), seg)(0) == doctest::Approx(-1.0));
  }

  // Pure functional drift term L = 3 with H f = 0, G = 1.
  {
    SurfacePart part = identity_part();
    part.tail_derivative = [](const HistorySegment&) { return 3.0; };
    part.state_value = nullptr;
    auto surface = SlidingSurface::combine(
        Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                           [](double) { return 0.0; }, [](double) { return 0.0; }),
        part, SurfacePart::zero(1));
    auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
    HistorySegment s1(1.0, vec1(0.5));
    CHECK(equivalent_control(surface, sys, s1)(0) == doctest::Approx(-3.0));
  }
}

TEST_CASE("smc controller with the sign gain") {
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  auto surface = scalar_surface();
  HistorySegment above(1.0, vec1(2.0));  // U > 0, u_e = 0, G = 1
  CHECK(smc_controller(surface, sys, GainSpec::sign(5.0), above)(0) == doctest::Approx(-5.0));

  HistorySegment on(1.0, vec1(0.0));  // U = 0: sgn(0) = 0 leaves u = u_e
  CHECK(smc_controller(surface, sys, GainSpec::sign(5.0), on)(0) == doctest::Approx(0.0));
}

TEST_CASE("krasovskii gain scales with the surface value") {
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  auto surface = scalar_surface();
  HistorySegment seg(1.0, vec1(4.0));
  CHECK(smc_controller(surface, sys, GainSpec::krasovskii(0.025), seg)(0) ==
        doctest::Approx(-0.1));
}

TEST_CASE("razumikhin gain: sliding band guard and spec checks") {
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  auto surface = scalar_surface();
  auto gain = GainSpec::razumikhin(2.2, ComparisonFunction::linear(2.0));

  HistorySegment seg(1.0, vec1(1.0));
  // K = 2.2 * 1 - 2 * 1 / 1 = 0.2.
  CHECK(smc_controller(surface, sys, gain, seg)(0) == doctest::Approx(-0.2));

  HistorySegment on(1.0, vec1(0.0));
  CHECK(smc_controller(surface, sys, gain, on)(0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(GainSpec::razumikhin(2.2, ComparisonFunction::linear(3.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(GainSpec::sign(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(GainSpec::sigmoid(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sigmoid gain approaches the sign gain away from the surface") {
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  auto surface = scalar_surface();
  auto gain = GainSpec::sigmoid(5.0, 1e-3);
  HistorySegment far(1.0, vec1(10.0));
  CHECK(smc_controller(surface, sys, gain, far)(0) == doctest::Approx(-5.0).epsilon(1e-3));
  HistorySegment near(1.0, vec1(1e-6));
  CHECK(std::abs(smc_controller(surface, sys, gain, near)(0)) < 0.01);
}

TEST_CASE("control laws are invariant under positive rescaling of the surface") {
  // Scaling the surface by c > 0 scales H, F and L together; the
  // equivalent control is exactly invariant, and so is the full law for a
  // gain that is homogeneous in the surface value.
  VectorXd f(2);
  f << 0.5, -1.0;
  MatrixXd g(2, 1);
  g << 1.0, 0.3;
  auto sys = fixed_system(f, g);
  auto make_surface = [](double scale) {
    SurfacePart part = SurfacePart::from_state(
        [](const VectorXd& x) { return x(0) + 2.0 * x(1); },
        [](const VectorXd&) { return VectorXd(Eigen::Vector2d(1.0, 2.0)); });
    part.tail_derivative = [](const HistorySegment&) { return 0.4; };
    return SlidingSurface::combine(
        Combiner::additive([scale](double v) { return scale * v; },
                           [scale](double) { return scale; }, [](double) { return 0.0; },
                           [](double) { return 0.0; }),
        part, SurfacePart::zero(2));
  };
  HistorySegment seg(1.0, Eigen::Vector2d(0.7, -0.2));
  const VectorXd ue1 = equivalent_control(make_surface(1.0), sys, seg);
  const VectorXd ue3 = equivalent_control(make_surface(3.0), sys, seg);
  CHECK((ue1 - ue3).norm() <= 1e-12);

  auto gain = GainSpec::krasovskii(0.8);
  const VectorXd u1 = smc_controller(make_surface(1.0), sys, gain, seg);
  const VectorXd u3 = smc_controller(make_surface(3.0), sys, gain, seg);
  CHECK((u1 - u3).norm() <= 1e-12);
}

TEST_CASE("transversality floor: throw by default, clamp in closed loop") {
  auto sys = fixed_system(vec1(1.0), MatrixXd::Zero(1, 1));
  auto surface = scalar_surface();
  HistorySegment seg(1.0, vec1(1.0));
  CHECK_THROWS_AS(smc_controller(surface, sys, GainSpec::sign(1.0), seg), TransversalityError);

  auto diag = std::make_shared<RunDiagnostics>();
  Controller controller = make_smc_controller(surface, sys, GainSpec::sign(1.0),
                                              SmcOptions{1e-8, false, 4}, diag);
  CHECK(controller(seg).norm() == 0.0);  // G = 0: clamped law returns no push
  CHECK(diag->transversality_clamps.load() == 1);
}

TEST_CASE("surface validity report") {
  // Linear combiner: c bounds the initial surface magnitude.
  auto constant_part = [](double c) {
    return SurfacePart::from_state([c](const VectorXd&) { return c; },
                                   [](const VectorXd&) {
                                     return VectorXd(VectorXd::Zero(1));
                                   });
  };
  HistorySegment xi(1.0, vec1(0.0));
  // U(xi) = 0.45 - 3 + 10 = 7.45 < c = 10.
  auto linear_ok = SlidingSurface::combine(Combiner::linear(1.0, 1.0, 10.0), constant_part(0.45),
                                           constant_part(3.0));
  auto report = surface_validity(linear_ok, xi, {});
  CHECK(report.initial_bound.checked);
  CHECK(report.initial_bound.pass);
  CHECK(report.initial_bound.margin == doctest::Approx(10.0 - 7.45));

  // Boundary samples dominated by an unbounded barrier: growth holds.
  auto surface = scalar_surface();
  HistorySegment xi2(1.0, vec1(1.0));
  std::vector<HistorySegment> boundary{HistorySegment(1.0, vec1(5.0))};
  auto report2 = surface_validity(surface, xi2, boundary);
  CHECK(report2.boundary_growth.checked);
  CHECK(report2.boundary_growth.pass);
  CHECK(report2.roots_interior.pass);

  // Initial segment on the boundary: dominance degenerates to equality.
  auto report3 = surface_validity(surface, HistorySegment(1.0, vec1(5.0)), boundary);
  CHECK(report3.boundary_dominance.degenerate);
}

TEST_CASE("second-order surface restores transversality") {
  // Double integrator with U = x1: L_g U = 0 but L_g L_f U = b.
  VectorXd f0(2);
  f0 << 0.0, 0.0;
  ControlAffineDelaySystem sys;
  sys.n = 2;
  sys.m = 1;
  sys.delay_bound = 1.0;
  sys.drift = [](const HistorySegment& seg) {
    return VectorXd(Eigen::Vector2d(seg.current()(1), 0.0));
  };
  sys.input_map = [](const HistorySegment&) {
    MatrixXd g(2, 1);
    g << 0.0, 1.0;
    return g;
  };

  auto base = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }),
      SurfacePart::from_state([](const VectorXd& x) { return x(0); },
                              [](const VectorXd&) {
                                return VectorXd(Eigen::Vector2d(1.0, 0.0));
                              }),
      SurfacePart::zero(2));

  HistorySegment seg(1.0, Eigen::Vector2d(1.5, -0.7));
  CHECK(base.terms(sys, seg).G.norm() == 0.0);

  const SlidingSurface composed = second_order_surface(base, sys, 2.0, 3.0);
  CHECK(composed.value(seg) == doctest::Approx(2.0 * 1.5 + 3.0 * -0.7));
  const SurfaceTerms terms = composed.terms(sys, seg);
  CHECK(terms.H(0) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(terms.H(1) == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(terms.G(0) == doctest::Approx(3.0).epsilon(1e-5));

  CHECK_THROWS_AS(second_order_surface(base, sys, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("second-order composition rejects functional surfaces") {
  SurfacePart part = identity_part();
  part.tail_derivative = [](const HistorySegment&) { return 1.0; };
  part.state_value = nullptr;
  auto functional = SlidingSurface::combine(
      Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }),
      part, SurfacePart::zero(1));
  auto sys = fixed_system(vec1(0.0), MatrixXd::Ones(1, 1));
  CHECK_THROWS_AS(second_order_surface(functional, sys, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("reaching functional decreases under smooth gains in closed loop") {
  // One Euler-like probe: D+W <= tol along a short simulated run.
  ControlAffineDelaySystem sys;
  sys.n = 1;
  sys.m = 1;
  sys.delay_bound = 0.1;
  sys.drift = [](const HistorySegment& seg) { return VectorXd(0.2 * seg.eval(-0.1)); };
  sys.input_map = [](const HistorySegment&) { return MatrixXd::Ones(1, 1); };
  auto surface = scalar_surface();
  for (auto gain : {GainSpec::sigmoid(2.0, 0.01), GainSpec::krasovskii(0.5)}) {
    HistorySegment seg(0.1, vec1(3.0));
    const double dt = 1e-3;
    double prev_w = surface.reaching_value(seg);
    for (int step = 0; step < 2000; ++step) {
      const VectorXd u = smc_controller(surface, sys, gain, seg, SmcOptions{1e-8, true, 4});
      const VectorXd x = seg.current();
      // Forward Euler is enough for a decrease probe.
      const VectorXd x_next = x + dt * (sys.drift(seg) + sys.input_map(seg) * u);
      seg = seg.advance({{dt, x_next}});
      const double w = surface.reaching_value(seg);
      CHECK(w <= prev_w + 10.0 * dt * dt);
      prev_w = w;
    }
  }
}
