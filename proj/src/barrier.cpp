#include "tdsafe/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace tdsafe {
namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kReciprocalFloor = 1e-12;

SetRegion classify(double h) {
  if (h > kBoundaryTol) return SetRegion::kInterior;
  if (h < -kBoundaryTol) return SetRegion::kExterior;
  return SetRegion::kBoundary;
}

double sup_abs_h(const SafeSetFunction& ss, const HistorySegment& seg, int refinement) {
  return seg.sup_transform(
      [&](const Eigen::VectorXd& x) { return std::abs(ss.value_at_state(x)); }, refinement);
}

}  // namespace

SafeSetFunction SafeSetFunction::state(ScalarField h, GradientField grad_h) {
  SafeSetFunction ss;
  ss.kind = Kind::kState;
  ss.h = std::move(h);
  ss.grad_h = std::move(grad_h);
  return ss;
}

SafeSetFunction SafeSetFunction::functional(ScalarField h1, GradientField grad_h1,
                                            std::function<double(const HistorySegment&)> h2,
                                            std::function<double(const HistorySegment&)> dplus_h2) {
  SafeSetFunction ss;
  ss.kind = Kind::kFunctional;
  ss.h1 = std::move(h1);
  ss.grad_h1 = std::move(grad_h1);
  ss.h2 = std::move(h2);
  ss.dplus_h2 = std::move(dplus_h2);
  return ss;
}

double SafeSetFunction::value_at_state(const Eigen::VectorXd& x) const {
  if (kind != Kind::kState) {
    throw std::invalid_argument("SafeSetFunction: functional safe set has no pointwise value");
  }
  return h(x);
}

double SafeSetFunction::value(const HistorySegment& seg) const {
  if (kind == Kind::kState) return h(seg.current());
  return h1(seg.current()) + h2(seg);
}

Membership membership(const SafeSetFunction& ss, const Eigen::VectorXd& x) {
  const double h = ss.value_at_state(x);
  return {classify(h), h};
}

Membership membership(const SafeSetFunction& ss, const HistorySegment& seg) {
  const double h = ss.value(seg);
  return {classify(h), h};
}

BarrierCertificate BarrierCertificate::reciprocal_razumikhin(
    SafeSetFunction ss, ScalarField b, GradientField grad_b, ComparisonFunction alpha1,
    ComparisonFunction alpha2, ComparisonFunction gamma_rr, ComparisonFunction eta_rr) {
  BarrierCertificate cert;
  cert.variant = Variant::kReciprocalRazumikhin;
  cert.safe_set = std::move(ss);
  cert.b = std::move(b);
  cert.grad_b = std::move(grad_b);
  cert.sandwich_alpha1 = std::move(alpha1);
  cert.sandwich_alpha2 = std::move(alpha2);
  cert.gamma = std::move(gamma_rr);
  cert.eta = std::move(eta_rr);
  return cert;
}

BarrierCertificate BarrierCertificate::zeroing_razumikhin(SafeSetFunction ss,
                                                          ComparisonFunction gamma_rz,
                                                          ComparisonFunction eta_rz) {
  BarrierCertificate cert;
  cert.variant = Variant::kZeroingRazumikhin;
  cert.safe_set = std::move(ss);
  cert.gamma = std::move(gamma_rz);
  cert.eta = std::move(eta_rz);
  return cert;
}

BarrierCertificate BarrierCertificate::reciprocal_krasovskii(
    SafeSetFunction ss, ScalarField b1, GradientField grad_b1,
    std::function<double(const HistorySegment&)> b2,
    std::function<double(const HistorySegment&)> dplus_b2, ComparisonFunction alpha1,
    ComparisonFunction alpha2, ComparisonFunction gamma_kr) {
  BarrierCertificate cert;
  cert.variant = Variant::kReciprocalKrasovskii;
  cert.safe_set = std::move(ss);
  cert.b1 = std::move(b1);
  cert.grad_b1 = std::move(grad_b1);
  cert.b2 = std::move(b2);
  cert.dplus_b2 = std::move(dplus_b2);
  cert.sandwich_alpha1 = std::move(alpha1);
  cert.sandwich_alpha2 = std::move(alpha2);
  cert.gamma = std::move(gamma_kr);
  return cert;
}

BarrierCertificate BarrierCertificate::zeroing_krasovskii(SafeSetFunction ss,
                                                          ComparisonFunction gamma_kz) {
  BarrierCertificate cert;
  cert.variant = Variant::kZeroingKrasovskii;
  cert.safe_set = std::move(ss);
  cert.gamma = std::move(gamma_kz);
  return cert;
}

namespace {

void sandwich_entry(const BarrierCertificate& cert, double h, double barrier_value,
                    SandwichReport& report) {
  SandwichReport::Entry entry{h, 0.0, false, false};
  if (classify(h) != SetRegion::kInterior) {
    entry.skipped = true;
    report.entries.push_back(entry);
    return;
  }
  entry.reciprocal = 1.0 / barrier_value;
  const double lo = (*cert.sandwich_alpha1)(h);
  const double hi = (*cert.sandwich_alpha2)(h);
  entry.pass = lo <= entry.reciprocal && entry.reciprocal <= hi;
  if (!entry.pass) {
    report.all_pass = false;
    report.worst_violation = std::max(
        report.worst_violation, std::max(lo - entry.reciprocal, entry.reciprocal - hi));
  }
  report.entries.push_back(entry);
}

}  // namespace

SandwichReport sandwich_check(const BarrierCertificate& cert,
                              const std::vector<Eigen::VectorXd>& samples) {
  if (cert.variant != BarrierCertificate::Variant::kReciprocalRazumikhin) {
    throw std::invalid_argument("sandwich_check: state samples require an R-type state certificate");
  }
  SandwichReport report;
  for (const auto& x : samples) {
    sandwich_entry(cert, cert.safe_set.value_at_state(x), cert.b(x), report);
  }
  return report;
}

SandwichReport sandwich_check(const BarrierCertificate& cert,
                              const std::vector<HistorySegment>& samples) {
  SandwichReport report;
  for (const auto& seg : samples) {
    if (cert.variant == BarrierCertificate::Variant::kReciprocalRazumikhin) {
      const Eigen::VectorXd x = seg.current();
      sandwich_entry(cert, cert.safe_set.value_at_state(x), cert.b(x), report);
    } else if (cert.variant == BarrierCertificate::Variant::kReciprocalKrasovskii) {
      sandwich_entry(cert, cert.safe_set.value(seg), cert.b1(seg.current()) + cert.b2(seg), report);
    } else {
      throw std::invalid_argument("sandwich_check: certificate has no reciprocal barrier");
    }
  }
  return report;
}

double barrier_margin(const BarrierCertificate& cert, const ControlAffineDelaySystem& sys,
                      const HistorySegment& seg, const Eigen::VectorXd& u, int refinement) {
  using Variant = BarrierCertificate::Variant;
  const Eigen::VectorXd x = seg.current();
  const Eigen::VectorXd f = sys.drift(seg);
  const Eigen::MatrixXd g = sys.input_map(seg);

  switch (cert.variant) {
    case Variant::kReciprocalRazumikhin: {
      if (classify(cert.safe_set.value_at_state(x)) != SetRegion::kInterior) {
        throw std::domain_error("barrier_margin: reciprocal barrier undefined outside the interior");
      }
      const Eigen::VectorXd grad = cert.grad_b(x);
      const double lhs = grad.dot(f) + (g.transpose() * grad).dot(u);
      const double rhs = cert.gamma(cert.safe_set.value_at_state(x)) -
                         (*cert.eta)(sup_abs_h(cert.safe_set, seg, refinement));
      return lhs - rhs;  // admissible when lhs < rhs
    }
    case Variant::kZeroingRazumikhin: {
      const Eigen::VectorXd grad = cert.safe_set.grad_h(x);
      const double lhs = grad.dot(f) + (g.transpose() * grad).dot(u);
      const double rhs = -cert.gamma(cert.safe_set.value_at_state(x)) +
                         (*cert.eta)(sup_abs_h(cert.safe_set, seg, refinement));
      return rhs - lhs;  // admissible when lhs > rhs
    }
    case Variant::kReciprocalKrasovskii: {
      if (classify(cert.safe_set.value(seg)) != SetRegion::kInterior) {
        throw std::domain_error("barrier_margin: reciprocal barrier undefined outside the interior");
      }
      const Eigen::VectorXd grad = cert.grad_b1(x);
      const double lhs = grad.dot(f) + cert.dplus_b2(seg) + (g.transpose() * grad).dot(u);
      return lhs - cert.gamma(cert.safe_set.value(seg));
    }
    case Variant::kZeroingKrasovskii: {
      const Eigen::VectorXd grad = cert.safe_set.grad_h1(x);
      const double lhs = grad.dot(f) + cert.safe_set.dplus_h2(seg) + (g.transpose() * grad).dot(u);
      return -cert.gamma(cert.safe_set.value(seg)) - lhs;
    }
  }
  throw std::logic_error("barrier_margin: unreachable");
}

InvarianceReport invariance_monitor(const Trajectory& traj, const SafeSetFunction& ss,
                                    const std::optional<std::string>& channel) {
  if (traj.size() == 0) throw std::invalid_argument("invariance_monitor: empty trajectory");
  InvarianceReport report;
  report.min_h = std::numeric_limits<double>::infinity();
  auto visit = [&](double t, double h) {
    report.min_h = std::min(report.min_h, h);
    if (h <= 0.0 && !report.first_violation) report.first_violation = t;
  };
  if (channel) {
    const auto& series = traj.channel(*channel);
    for (size_t i = 0; i < series.size(); ++i) visit(traj.times[i], series[i]);
  } else {
    if (ss.kind != SafeSetFunction::Kind::kState) {
      throw std::invalid_argument(
          "invariance_monitor: functional safe sets need a recorded channel");
    }
    for (size_t i = 0; i < traj.size(); ++i) visit(traj.times[i], ss.h(traj.states[i]));
  }
  return report;
}

SoftminEval softmin_eval(const std::vector<double>& h, const std::vector<double>& eps,
                         WarningGate gate, RunDiagnostics* diag) {
  if (h.size() != eps.size() || h.empty()) {
    throw std::invalid_argument("softmin_eval: need matching, nonempty h and eps");
  }
  SoftminEval out;
  out.h.resize(h.size());
  out.gate.resize(h.size());
  out.b.resize(h.size());
  out.dvalue_dh.assign(h.size(), 0.0);
  for (size_t i = 0; i < h.size(); ++i) {
    if (eps[i] <= 0.0) throw std::invalid_argument("softmin_eval: eps must be > 0");
    double hi = h[i];
    if (std::abs(hi) < kReciprocalFloor) {
      hi = hi < 0.0 ? -kReciprocalFloor : kReciprocalFloor;
      if (diag) ++diag->barrier_floor_hits;
    }
    out.h[i] = hi;
    const bool active = gate == WarningGate::kInsideWarning ? (h[i] <= eps[i]) : (h[i] >= eps[i]);
    out.gate[i] = active;
    const double r = 1.0 - eps[i] / hi;
    out.b[i] = active ? r * r : 0.0;
  }
  // Shifted log-sum-exp keeps the value finite when a component saturates.
  const double lead = *std::min_element(out.b.begin(), out.b.end());
  double sum = 0.0;
  std::vector<double> expterm(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    expterm[i] = std::exp(lead - out.b[i]);
    sum += expterm[i];
  }
  out.value = lead - std::log(sum);
  for (size_t i = 0; i < h.size(); ++i) {
    if (!out.gate[i]) continue;
    const double db_dh = 2.0 * (1.0 - eps[i] / out.h[i]) * (eps[i] / (out.h[i] * out.h[i]));
    out.dvalue_dh[i] = expterm[i] / sum * db_dh;
  }
  return out;
}

std::function<double(const HistorySegment&)> softmin_barrier(
    std::vector<SoftminPart> parts, WarningGate gate, std::shared_ptr<RunDiagnostics> diag) {
  if (parts.empty()) throw std::invalid_argument("softmin_barrier: need at least one part");
  for (const auto& p : parts) {
    if (p.eps <= 0.0) throw std::invalid_argument("softmin_barrier: eps must be > 0");
  }
  return [parts = std::move(parts), gate, diag](const HistorySegment& seg) {
    std::vector<double> h(parts.size()), eps(parts.size());
    for (size_t i = 0; i < parts.size(); ++i) {
      h[i] = parts[i].h.value(seg);
      eps[i] = parts[i].eps;
    }
    return softmin_eval(h, eps, gate, diag.get()).value;
  };
}

}  // namespace tdsafe
