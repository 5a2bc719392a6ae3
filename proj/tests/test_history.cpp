#include <doctest.h>

#include <cmath>

#include "tdsafe/history.hpp"

using tdsafe::HistorySegment;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }
VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

HistorySegment knots(double delay, std::vector<double> thetas, std::vector<double> vals) {
  Eigen::MatrixXd m(1, static_cast<long>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) m(0, i) = vals[i];
  return HistorySegment(delay, std::move(thetas), m);
}

}  // namespace

TEST_CASE("eval: constant segment returns its value everywhere") {
  HistorySegment seg(1.0, vec2(1.0, 2.0));
  CHECK(seg.eval(-1.0) == vec2(1.0, 2.0));
  CHECK(seg.eval(-0.37) == vec2(1.0, 2.0));
  CHECK(seg.eval(0.0) == vec2(1.0, 2.0));
  CHECK(seg.is_constant());
}

TEST_CASE("eval: linear interpolation midpoint") {
  HistorySegment seg = knots(1.0, {-1.0, 0.0}, {0.0, 2.0});
  CHECK(seg.eval(-0.5)(0) == doctest::Approx(1.0));
}

TEST_CASE("eval: exact at interior sample points") {
  HistorySegment seg = knots(1.0, {-1.0, -0.5, 0.0}, {0.0, 1.0, 0.0});
  CHECK(seg.eval(-0.5)(0) == 1.0);
  CHECK(seg.eval(-1.0)(0) == 0.0);
}

TEST_CASE("eval: out-of-window access is a domain error") {
  HistorySegment seg(1.0, vec1(1.0));
  CHECK_THROWS_AS(seg.eval(-1.5), std::domain_error);
  CHECK_THROWS_AS(seg.eval(0.5), std::domain_error);
}

TEST_CASE("sup_norm examples") {
  CHECK(HistorySegment(1.0, vec2(0.0, 0.0)).sup_norm() == 0.0);
  CHECK(HistorySegment(1.0, vec2(1.0, 0.0)).sup_norm() == 1.0);

  std::vector<double> thetas{-1.0, 0.0};
  Eigen::MatrixXd vals(2, 2);
  vals.col(0) = vec2(3.0, 4.0);
  vals.col(1) = vec2(0.0, 0.0);
  HistorySegment seg(1.0, thetas, vals);
  CHECK(seg.sup_norm() == doctest::Approx(5.0));
}

TEST_CASE("sup_transform examples") {
  HistorySegment constant(2.0, vec1(3.0));
  CHECK(constant.sup_transform([](const VectorXd& v) { return v(0) + 1.0; }) == 4.0);

  HistorySegment seg = knots(1.0, {-1.0, 0.0}, {2.0, 1.0});
  CHECK(seg.sup_transform([](const VectorXd& v) { return v(0) * v(0); }) == doctest::Approx(4.0));

  HistorySegment zero(1.0, vec1(0.0));
  CHECK(zero.sup_transform([](const VectorXd& v) { return std::abs(v(0)); }) == 0.0);
}

TEST_CASE("sup_transform of the norm matches sup_norm on the sample grid") {
  HistorySegment seg = knots(1.0, {-1.0, -0.4, 0.0}, {-3.0, 0.5, 2.0});
  CHECK(seg.sup_transform([](const VectorXd& v) { return v.norm(); }, 1) ==
        doctest::Approx(seg.sup_norm(1)));
}

TEST_CASE("sup_norm dominates eval on the grid") {
  HistorySegment seg = knots(1.0, {-1.0, -0.7, -0.2, 0.0}, {0.3, -2.0, 1.1, 0.9});
  const double sup = seg.sup_norm();
  for (double theta : seg.thetas()) {
    CHECK(sup >= seg.eval(theta).norm() - 1e-15);
  }
}

TEST_CASE("advance: empty tail is the identity") {
  HistorySegment seg = knots(1.0, {-1.0, 0.0}, {1.0, 2.0});
  HistorySegment out = seg.advance({});
  CHECK(out.eval(-0.5)(0) == seg.eval(-0.5)(0));
}

TEST_CASE("advance: window shift by half the delay") {
  HistorySegment seg = knots(1.0, {-1.0, -0.5, 0.0}, {10.0, 11.0, 12.0});
  HistorySegment out = seg.advance({{0.5, vec1(13.0)}});
  REQUIRE(out.thetas().size() == 3);
  CHECK(out.eval(-1.0)(0) == 11.0);
  CHECK(out.eval(-0.5)(0) == 12.0);
  CHECK(out.eval(0.0)(0) == 13.0);
  CHECK(out.final_time() == doctest::Approx(0.5));
}

TEST_CASE("advance: constant history advanced with constant tail stays constant") {
  HistorySegment seg(1.0, vec1(4.0));
  HistorySegment out = seg.advance({{0.25, vec1(4.0)}, {0.5, vec1(4.0)}});
  for (double theta : {-1.0, -0.6, -0.1, 0.0}) {
    CHECK(out.eval(theta)(0) == doctest::Approx(4.0));
  }
}

TEST_CASE("advance: composition over two hops matches one hop") {
  HistorySegment seg = knots(1.0, {-1.0, -0.5, 0.0}, {1.0, -1.0, 2.0});
  auto a = vec1(3.0);
  auto b = vec1(-2.0);
  HistorySegment two = seg.advance({{0.25, a}}).advance({{0.25, b}});
  HistorySegment one = seg.advance({{0.25, a}, {0.5, b}});
  for (int i = 0; i <= 20; ++i) {
    const double theta = -1.0 + i * 0.05;
    CHECK(two.eval(theta)(0) == doctest::Approx(one.eval(theta)(0)).epsilon(1e-12));
  }
}

TEST_CASE("advance: gap wider than the window is rejected") {
  HistorySegment seg = knots(1.0, {-1.0, 0.0}, {0.0, 1.0});
  CHECK_THROWS_AS(seg.advance({{2.5, vec1(1.0)}}), std::invalid_argument);
  CHECK_THROWS_AS(seg.advance({{-0.5, vec1(1.0)}}), std::invalid_argument);
}

TEST_CASE("advance: misaligned shift synthesizes the window start exactly") {
  // The stored signal is linear in time, so every evaluation stays exact.
  HistorySegment seg = knots(1.0, {-1.0, -0.5, 0.0}, {0.0, 0.5, 1.0});
  HistorySegment out = seg.advance({{0.3, vec1(1.3)}});
  CHECK(out.eval(-1.0)(0) == doctest::Approx(0.3));
  CHECK(out.eval(-0.15)(0) == doctest::Approx(1.15));
  CHECK(out.thetas().front() == -1.0);
  CHECK(out.thetas().back() == 0.0);
}

TEST_CASE("trapezoid on full and partial windows") {
  HistorySegment constant(2.0, vec1(3.0));
  CHECK(constant.trapezoid([](const VectorXd& v) { return v(0); }) == doctest::Approx(6.0));
  CHECK(constant.trapezoid([](const VectorXd& v) { return v(0); }, -0.5) == doctest::Approx(1.5));

  // phi(theta) = theta on [-1, 0]: trapezoid of phi^2 approaches 1/3.
  HistorySegment ramp = HistorySegment::sample(
      1.0, 1, [](double theta) { return vec1(theta); }, 0.01);
  CHECK(ramp.trapezoid([](const VectorXd& v) { return v(0) * v(0); }) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("with_current replaces only the head") {
  HistorySegment seg = knots(1.0, {-1.0, 0.0}, {5.0, 7.0});
  HistorySegment out = seg.with_current(vec1(9.0));
  CHECK(out.eval(0.0)(0) == 9.0);
  CHECK(out.eval(-1.0)(0) == 5.0);

  HistorySegment constant(1.0, vec1(2.0));
  HistorySegment out2 = constant.with_current(vec1(3.0));
  CHECK(out2.eval(0.0)(0) == 3.0);
  CHECK(out2.eval(-1.0)(0) == 2.0);
}

TEST_CASE("segment invariants are validated") {
  Eigen::MatrixXd vals(1, 2);
  vals << 0.0, 1.0;
  CHECK_THROWS_AS(HistorySegment(1.0, {-0.7, 0.0}, vals), std::invalid_argument);
  CHECK_THROWS_AS(HistorySegment(1.0, {-1.0, -0.2}, vals), std::invalid_argument);
  CHECK_THROWS_AS(HistorySegment(-1.0, vec1(0.0)), std::invalid_argument);
  Eigen::MatrixXd bad(1, 3);
  bad << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(HistorySegment(1.0, {-1.0, -1.0, 0.0}, bad), std::invalid_argument);
}

TEST_CASE("hermite interpolation reproduces a cubic exactly") {
  auto cubic = [](double t) { return t * t * t - 2.0 * t; };
  auto dcubic = [](double t) { return 3.0 * t * t - 2.0; };
  std::vector<double> thetas{-1.0, -0.5, 0.0};
  Eigen::MatrixXd vals(1, 3), ders(1, 3);
  for (int i = 0; i < 3; ++i) {
    vals(0, i) = cubic(thetas[i]);
    ders(0, i) = dcubic(thetas[i]);
  }
  HistorySegment seg(1.0, thetas, vals, ders);
  for (double theta : {-0.9, -0.6, -0.25, -0.1}) {
    CHECK(seg.eval(theta)(0) == doctest::Approx(cubic(theta)).epsilon(1e-12));
  }
}
