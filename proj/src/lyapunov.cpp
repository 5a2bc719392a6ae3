#include "tdsafe/lyapunov.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tdsafe {
namespace {

// Random piecewise-linear segment with sup norm <= delta: a handful of
// knots, values drawn from the ball of radius delta.
HistorySegment random_segment(std::mt19937_64& rng, int dimension, double delay,
                              double delta) {
  std::uniform_int_distribution<int> knot_count(2, 5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int k = knot_count(rng);
  std::vector<double> thetas(k);
  Eigen::MatrixXd values(dimension, k);
  for (int i = 0; i < k; ++i) {
    thetas[i] = -delay + delay * i / (k - 1);
    Eigen::VectorXd v(dimension);
    for (int d = 0; d < dimension; ++d) v(d) = unit(rng);
    const double norm = v.norm();
    if (norm > 1.0) v /= norm;  // keep inside the unit ball, then scale
    values.col(i) = delta * v;
  }
  thetas.front() = -delay;
  thetas.back() = 0.0;
  return HistorySegment(delay, std::move(thetas), std::move(values));
}

double sup_of_value(const ScalarField& v, const HistorySegment& seg, int refinement) {
  return seg.sup_transform([&](const Eigen::VectorXd& x) { return v(x); }, refinement);
}

}  // namespace

Eigen::VectorXd finite_difference_gradient(const ScalarField& f, const Eigen::VectorXd& x) {
  const double step = 1e-6 * (1.0 + x.norm());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double hi = f(probe);
    probe(i) = x(i) - step;
    const double lo = f(probe);
    probe(i) = x(i);
    g(i) = (hi - lo) / (2.0 * step);
  }
  return g;
}

Eigen::VectorXd RazumikhinCertificate::grad(const Eigen::VectorXd& x) const {
  return gradient ? gradient(x) : finite_difference_gradient(value, x);
}

Eigen::VectorXd KrasovskiiCertificate::grad1(const Eigen::VectorXd& x) const {
  return grad_v1 ? grad_v1(x) : finite_difference_gradient(v1, x);
}

RazumikhinCertificate RazumikhinCertificate::classic(ScalarField v, GradientField grad,
                                                     ComparisonFunction alpha1,
                                                     ComparisonFunction alpha2,
                                                     ComparisonFunction gamma_c,
                                                     ComparisonFunction rho) {
  RazumikhinCertificate cert;
  cert.variant = Variant::kClassic;
  cert.value = std::move(v);
  cert.gradient = std::move(grad);
  cert.alpha1 = std::move(alpha1);
  cert.alpha2 = std::move(alpha2);
  cert.gamma_c = std::move(gamma_c);
  cert.rho = std::move(rho);
  return cert;
}

RazumikhinCertificate RazumikhinCertificate::steepest_descent(ScalarField v, GradientField grad,
                                                              ComparisonFunction alpha1,
                                                              ComparisonFunction alpha2,
                                                              ComparisonFunction gamma_r,
                                                              ComparisonFunction eta_r) {
  RazumikhinCertificate cert;
  cert.variant = Variant::kSteepestDescent;
  cert.value = std::move(v);
  cert.gradient = std::move(grad);
  cert.alpha1 = std::move(alpha1);
  cert.alpha2 = std::move(alpha2);
  cert.gamma_r = std::move(gamma_r);
  cert.eta_r = std::move(eta_r);
  return cert;
}

Eigen::VectorXd sontag_kappa(double lambda, double p, const Eigen::VectorXd& q) {
  if (lambda <= 0.0) throw std::invalid_argument("sontag_kappa: lambda must be > 0");
  const double q2 = q.squaredNorm();
  if (q2 == 0.0) return Eigen::VectorXd::Zero(q.size());
  const double root = std::sqrt(p * p + lambda * q2 * q2);
  return -((p + root) / q2) * q;
}

Eigen::VectorXd universal_controller(const RazumikhinCertificate& cert, double lambda,
                                     const ControlAffineDelaySystem& sys,
                                     const HistorySegment& seg, int refinement) {
  if (cert.variant != RazumikhinCertificate::Variant::kSteepestDescent) {
    throw std::invalid_argument("universal_controller: requires a steepest-descent certificate");
  }
  if (seg.is_zero()) return Eigen::VectorXd::Zero(sys.m);
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd grad = cert.grad(x);
  const double lf = grad.dot(sys.drift(seg));
  const Eigen::VectorXd b = sys.input_map(seg).transpose() * grad;  // (LgV)^T
  const double a = lf + (*cert.gamma_r)(cert.value(x)) -
                   (*cert.eta_r)(sup_of_value(cert.value, seg, refinement));
  return sontag_kappa(lambda, a, b);
}

Eigen::VectorXd universal_controller(const KrasovskiiCertificate& cert, double lambda,
                                     const ControlAffineDelaySystem& sys,
                                     const HistorySegment& seg) {
  if (seg.is_zero()) return Eigen::VectorXd::Zero(sys.m);
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd grad = cert.grad1(x);
  const double lf = grad.dot(sys.drift(seg));
  const Eigen::VectorXd b = sys.input_map(seg).transpose() * grad;
  const double a = lf + cert.dplus_v2(seg) + cert.gamma_lk(cert.value(seg));
  return sontag_kappa(lambda, a, b);
}

Eigen::VectorXd domination_controller(const RazumikhinCertificate& cert,
                                      const std::function<double(double)>& dominating_gain,
                                      const ControlAffineDelaySystem& sys,
                                      const HistorySegment& seg) {
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd grad = cert.grad(x);
  const Eigen::VectorXd lg = sys.input_map(seg).transpose() * grad;
  return -dominating_gain(cert.value(x)) * lg;
}

bool razumikhin_condition(const RazumikhinCertificate& cert, const HistorySegment& seg,
                          const ComparisonFunction& rho, int refinement) {
  return rho(cert.value(seg.current())) >= sup_of_value(cert.value, seg, refinement);
}

double decrease_margin(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                       const HistorySegment& seg, const Eigen::VectorXd& u, int refinement) {
  if (cert.variant != RazumikhinCertificate::Variant::kSteepestDescent) {
    throw std::invalid_argument("decrease_margin: classic Razumikhin certificates have no "
                                "unconditional margin; use the steepest-descent variant");
  }
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd grad = cert.grad(x);
  const double lhs = grad.dot(sys.drift(seg)) + (sys.input_map(seg).transpose() * grad).dot(u);
  const double rhs = -(*cert.gamma_r)(cert.value(x)) +
                     (*cert.eta_r)(sup_of_value(cert.value, seg, refinement));
  return lhs - rhs;
}

double decrease_margin(const KrasovskiiCertificate& cert, const ControlAffineDelaySystem& sys,
                       const HistorySegment& seg, const Eigen::VectorXd& u) {
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd grad = cert.grad1(x);
  const double lhs = grad.dot(sys.drift(seg)) + cert.dplus_v2(seg) +
                     (sys.input_map(seg).transpose() * grad).dot(u);
  return lhs + cert.gamma_lk(cert.value(seg));
}

ScpReport scp_probe(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                    const std::vector<double>& delta_schedule, int samples_per_delta,
                    double lambda, std::uint64_t seed) {
  for (size_t i = 0; i + 1 < delta_schedule.size(); ++i) {
    if (delta_schedule[i + 1] >= delta_schedule[i]) {
      throw std::invalid_argument("scp_probe: delta schedule must strictly decrease");
    }
  }
  std::mt19937_64 rng(seed);
  ScpReport report;
  for (double delta : delta_schedule) {
    if (delta <= 0.0) throw std::invalid_argument("scp_probe: deltas must be positive");
    double worst = 0.0;
    for (int s = 0; s < samples_per_delta; ++s) {
      HistorySegment seg = random_segment(rng, sys.n, sys.delay_bound, delta);
      if (seg.is_zero()) continue;
      worst = std::max(worst, universal_controller(cert, lambda, sys, seg).norm());
    }
    report.rows.push_back({delta, worst});
  }
  if (report.rows.size() >= 2) {
    bool ok = report.rows.back().max_input_norm < report.rows.front().max_input_norm;
    for (size_t i = 0; i + 1 < report.rows.size(); ++i) {
      ok = ok && report.rows[i + 1].max_input_norm <= 2.0 * report.rows[i].max_input_norm;
    }
    report.shrinking = ok;
  }
  return report;
}

double chi_probe(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                 double radius, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    HistorySegment seg = random_segment(rng, sys.n, sys.delay_bound, radius);
    const Eigen::VectorXd grad = cert.grad(seg.current());
    const double lg2 = (sys.input_map(seg).transpose() * grad).squaredNorm();
    if (lg2 < 1e-12) continue;
    worst = std::max(worst, grad.dot(sys.drift(seg)) / lg2);
  }
  return worst;
}

}  // namespace tdsafe
