#include "tdsafe/smc.hpp"

#include <cmath>

namespace tdsafe {
namespace {

constexpr double kSlidingBand = 1e-9;

double tail_or_zero(const SurfacePart& part, const HistorySegment& seg) {
  return part.tail_derivative ? part.tail_derivative(seg) : 0.0;
}

}  // namespace

SurfacePart SurfacePart::from_state(ScalarField v, GradientField grad) {
  SurfacePart part;
  part.state_value = v;
  part.value = [v](const HistorySegment& seg) { return v(seg.current()); };
  if (grad) {
    part.head_gradient = [grad](const HistorySegment& seg) { return grad(seg.current()); };
  } else {
    part.head_gradient = [v](const HistorySegment& seg) {
      return finite_difference_gradient(v, seg.current());
    };
  }
  return part;
}

SurfacePart SurfacePart::from_certificate(const RazumikhinCertificate& cert) {
  SurfacePart part = from_state(cert.value, cert.gradient);
  if (!cert.gradient) {
    part.head_gradient = [cert](const HistorySegment& seg) { return cert.grad(seg.current()); };
  }
  return part;
}

SurfacePart SurfacePart::from_certificate(const KrasovskiiCertificate& cert) {
  SurfacePart part;
  part.value = [cert](const HistorySegment& seg) { return cert.value(seg); };
  part.head_gradient = [cert](const HistorySegment& seg) { return cert.grad1(seg.current()); };
  part.tail_derivative = cert.dplus_v2;
  return part;
}

SurfacePart SurfacePart::reciprocal_of(const SafeSetFunction& ss) {
  if (ss.kind != SafeSetFunction::Kind::kState) {
    throw std::invalid_argument("SurfacePart::reciprocal_of: state safe sets only");
  }
  ScalarField value = [h = ss.h](const Eigen::VectorXd& x) { return 1.0 / h(x); };
  GradientField grad = [h = ss.h, gh = ss.grad_h](const Eigen::VectorXd& x) {
    const double hv = h(x);
    return Eigen::VectorXd(-gh(x) / (hv * hv));
  };
  return from_state(std::move(value), std::move(grad));
}

SurfacePart SurfacePart::zero(int dimension) {
  SurfacePart part;
  part.state_value = [](const Eigen::VectorXd&) { return 0.0; };
  part.value = [](const HistorySegment&) { return 0.0; };
  part.head_gradient = [dimension](const HistorySegment&) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(dimension));
  };
  return part;
}

Combiner Combiner::linear(double a, double b, double c) {
  if (a <= 0.0 || b <= 0.0 || c <= 0.0) {
    throw std::invalid_argument("Combiner::linear: coefficients must be > 0");
  }
  Combiner comb;
  comb.value = [a, b, c](double v, double bv) { return a * v - b * bv + c; };
  comb.dv = [a](double, double) { return a; };
  comb.db = [b](double, double) { return -b; };
  comb.linear_shape = LinearShape{a, b, c};
  return comb;
}

Combiner Combiner::additive(std::function<double(double)> alpha,
                            std::function<double(double)> dalpha,
                            std::function<double(double)> beta,
                            std::function<double(double)> dbeta) {
  Combiner comb;
  comb.value = [alpha, beta](double v, double b) { return alpha(v) + beta(b); };
  comb.dv = [dalpha](double v, double) { return dalpha(v); };
  comb.db = [dbeta](double, double b) { return dbeta(b); };
  return comb;
}

Combiner Combiner::custom(std::function<double(double, double)> value,
                          std::function<double(double, double)> dv,
                          std::function<double(double, double)> db) {
  if (!value || !dv || !db) {
    throw std::invalid_argument("Combiner::custom: value and both partials required");
  }
  Combiner comb;
  comb.value = std::move(value);
  comb.dv = std::move(dv);
  comb.db = std::move(db);
  return comb;
}

SlidingSurface SlidingSurface::combine(Combiner combiner, SurfacePart lyapunov_part,
                                       SurfacePart barrier_part) {
  SlidingSurface surf;
  surf.state_based_ = !lyapunov_part.tail_derivative && !barrier_part.tail_derivative &&
                      lyapunov_part.state_value && barrier_part.state_value;
  surf.linear_shape_ = combiner.linear_shape;
  surf.combiner_ = std::move(combiner);
  surf.lyap_ = std::move(lyapunov_part);
  surf.barrier_ = std::move(barrier_part);
  return surf;
}

double SlidingSurface::value(const HistorySegment& seg) const {
  return combiner_.value(lyap_.value(seg), barrier_.value(seg));
}

double SlidingSurface::reaching_value(const HistorySegment& seg) const {
  const double u = value(seg);
  return 0.5 * u * u;
}

SurfaceTerms SlidingSurface::terms(const ControlAffineDelaySystem& sys,
                                   const HistorySegment& seg) const {
  const double v = lyap_.value(seg);
  const double b = barrier_.value(seg);
  const double dv = combiner_.dv(v, b);
  const double db = combiner_.db(v, b);
  SurfaceTerms terms;
  terms.H = (dv * lyap_.head_gradient(seg) + db * barrier_.head_gradient(seg)).transpose();
  terms.F = terms.H.dot(sys.drift(seg));
  terms.G = terms.H * sys.input_map(seg);
  terms.L = dv * tail_or_zero(lyap_, seg) + db * tail_or_zero(barrier_, seg);
  return terms;
}

double SlidingSurface::value_at_state(const HistorySegment& ref, const Eigen::VectorXd& x) const {
  auto part_at = [&](const SurfacePart& part) {
    if (part.state_value) return part.state_value(x);
    return part.value(ref.constant_like(x));
  };
  return combiner_.value(part_at(lyap_), part_at(barrier_));
}

double SlidingSurface::window_sup_abs(const HistorySegment& seg, int refinement) const {
  return seg.sup_transform(
      [&](const Eigen::VectorXd& x) { return std::abs(value_at_state(seg, x)); }, refinement);
}

GainSpec GainSpec::sign(double k) {
  if (k <= 0.0) throw std::invalid_argument("GainSpec::sign: K must be > 0");
  GainSpec g;
  g.variant_ = Variant::kSign;
  g.k_ = k;
  return g;
}

GainSpec GainSpec::sigmoid(double k, double eps) {
  if (k <= 0.0 || eps <= 0.0) throw std::invalid_argument("GainSpec::sigmoid: K, eps must be > 0");
  GainSpec g;
  g.variant_ = Variant::kSigmoid;
  g.k_ = k;
  g.eps_ = eps;
  return g;
}

GainSpec GainSpec::razumikhin(double k1, ComparisonFunction alpha) {
  if (k1 <= 0.0) throw std::invalid_argument("GainSpec::razumikhin: K1 must be > 0");
  for (double v : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
    const double a = alpha(v);
    if (!(a > 0.0) || !(a < k1 * v)) {
      throw std::invalid_argument("GainSpec::razumikhin: need 0 < alpha(v) < K1 v on v > 0");
    }
  }
  GainSpec g;
  g.variant_ = Variant::kRazumikhin;
  g.k_ = k1;
  g.alpha_ = std::move(alpha);
  return g;
}

GainSpec GainSpec::krasovskii(double k1) {
  if (k1 <= 0.0) throw std::invalid_argument("GainSpec::krasovskii: K1 must be > 0");
  GainSpec g;
  g.variant_ = Variant::kKrasovskii;
  g.k_ = k1;
  return g;
}

double GainSpec::reaching_term(const SlidingSurface& surf, const HistorySegment& seg) const {
  switch (variant_) {
    case Variant::kSign:
      return k_ * sgn(surf.value(seg));
    case Variant::kSigmoid: {
      const double u = surf.value(seg);
      return k_ * u / (std::abs(u) + eps_);
    }
    case Variant::kKrasovskii:
      return k_ * surf.value(seg);
    case Variant::kRazumikhin: {
      const double u0 = surf.value_at_state(seg, seg.current());
      if (std::abs(u0) <= kSlidingBand) return 0.0;  // on the surface
      const double sup = surf.window_sup_abs(seg);
      return k_ * u0 - alpha_(sup * sup) / u0;
    }
  }
  throw std::logic_error("GainSpec: unreachable");
}

JDecomposition j_decomposition(const ControlAffineDelaySystem& sys, const HistorySegment& seg,
                               const Eigen::RowVectorXd& H, double transversality_floor) {
  const Eigen::VectorXd f = sys.drift(seg);
  const Eigen::MatrixXd g = sys.input_map(seg);
  const Eigen::RowVectorXd G = H * g;
  const double gnorm2 = G.squaredNorm();
  if (std::sqrt(gnorm2) < transversality_floor) {
    throw TransversalityError(std::sqrt(gnorm2), transversality_floor);
  }
  const Eigen::MatrixXd J = f * G * g.transpose();  // n x n
  JDecomposition out;
  out.M = Eigen::MatrixXd::Identity(sys.n, sys.n) - g * G.transpose() * H / gnorm2;
  out.J1 = (J - J.transpose()) / gnorm2;
  out.J2 = (J.transpose() - J) / (2.0 * gnorm2);
  out.J3 = (J.transpose() + J) / (2.0 * gnorm2);
  return out;
}

double surface_eval(const SlidingSurface& surf, const HistorySegment& seg) {
  return surf.value(seg);
}

SurfaceTerms surface_terms(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                           const HistorySegment& seg) {
  return surf.terms(sys, seg);
}

namespace {

// Shared core of the control laws. H J3 H^T reduces to H f = F (see the
// J-decomposition identities), so no matrices are formed here.
Eigen::VectorXd smc_law(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                        const HistorySegment& seg, double reaching, const SmcOptions& options,
                        RunDiagnostics* diag) {
  const SurfaceTerms terms = surf.terms(sys, seg);
  double gnorm2 = terms.G.squaredNorm();
  const double floor2 = options.transversality_floor * options.transversality_floor;
  if (gnorm2 < floor2) {
    if (!options.clamp_at_floor) {
      throw TransversalityError(std::sqrt(gnorm2), options.transversality_floor);
    }
    gnorm2 = floor2;
    if (diag) ++diag->transversality_clamps;
  }
  return terms.G.transpose() * ((terms.F + terms.L + reaching) / -gnorm2);
}

}  // namespace

Eigen::VectorXd equivalent_control(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                                   const HistorySegment& seg, const SmcOptions& options,
                                   RunDiagnostics* diag) {
  return smc_law(surf, sys, seg, 0.0, options, diag);
}

Eigen::VectorXd smc_controller(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                               const GainSpec& gain, const HistorySegment& seg,
                               const SmcOptions& options, RunDiagnostics* diag) {
  return smc_law(surf, sys, seg, gain.reaching_term(surf, seg), options, diag);
}

Controller make_smc_controller(SlidingSurface surf, ControlAffineDelaySystem sys, GainSpec gain,
                               SmcOptions options, std::shared_ptr<RunDiagnostics> diag) {
  options.clamp_at_floor = true;
  return [surf = std::move(surf), sys = std::move(sys), gain = std::move(gain), options,
          diag = std::move(diag)](const HistorySegment& seg) {
    return smc_controller(surf, sys, gain, seg, options, diag.get());
  };
}

SurfaceValidityReport surface_validity(const SlidingSurface& surf, const HistorySegment& xi,
                                       const std::vector<HistorySegment>& boundary_samples,
                                       int refinement) {
  constexpr double kTol = 1e-9;
  SurfaceValidityReport report;

  const double xi_sup_abs = surf.window_sup_abs(xi, refinement);
  const double xi_value = surf.value(xi);

  if (surf.linear_shape()) {
    auto& cond = report.initial_bound;
    cond.name = "initial_bound";
    cond.checked = true;
    cond.margin = surf.linear_shape()->c - xi_sup_abs;
    cond.pass = xi_sup_abs >= 0.0 && cond.margin > 0.0;
  }

  if (!boundary_samples.empty()) {
    double min_abs = std::numeric_limits<double>::infinity();
    double min_val = std::numeric_limits<double>::infinity();
    for (const auto& seg : boundary_samples) {
      min_abs = std::min(min_abs, seg.sup_transform(
                                      [&](const Eigen::VectorXd& x) {
                                        return -std::abs(surf.value_at_state(seg, x));
                                      },
                                      refinement) *
                                      -1.0);
      min_val = std::min(min_val, surf.value(seg));
    }
    auto& dom = report.boundary_dominance;
    dom.name = "boundary_dominance";
    dom.checked = true;
    dom.margin = min_abs - xi_sup_abs;
    dom.degenerate = std::abs(dom.margin) <= kTol;
    dom.pass = dom.margin >= -kTol;

    auto& growth = report.boundary_growth;
    growth.name = "boundary_growth";
    growth.checked = true;
    growth.margin = min_val - xi_value;
    growth.degenerate = std::abs(growth.margin) <= kTol;
    growth.pass = growth.margin >= -kTol;

    auto& roots = report.roots_interior;
    roots.name = "roots_interior";
    roots.checked = true;
    roots.margin = min_abs;
    roots.pass = min_abs > kTol;  // a surface root on the boundary is a violation
  }
  return report;
}

SlidingSurface second_order_surface(
    const SlidingSurface& surf, const ControlAffineDelaySystem& sys, double a, double b,
    std::function<Eigen::RowVectorXd(const HistorySegment&)> grad_lfu) {
  if (a == 0.0 || b == 0.0) {
    throw std::invalid_argument("second_order_surface: a and b must be nonzero");
  }
  if (!surf.state_based()) {
    throw std::invalid_argument(
        "second_order_surface: only state-based surfaces support the L_f composition");
  }
  auto lfu = [surf, sys](const HistorySegment& seg) {
    return surf.terms(sys, seg).F;  // H f
  };

  SurfacePart composed;
  composed.value = [surf, lfu, a, b](const HistorySegment& seg) {
    return a * surf.value(seg) + b * lfu(seg);
  };
  if (grad_lfu) {
    composed.head_gradient = [surf, sys, grad_lfu, a, b](const HistorySegment& seg) {
      const SurfaceTerms t = surf.terms(sys, seg);
      return Eigen::VectorXd(a * t.H.transpose() + b * grad_lfu(seg).transpose());
    };
  } else {
    composed.head_gradient = [surf, sys, lfu, a, b](const HistorySegment& seg) {
      const SurfaceTerms t = surf.terms(sys, seg);
      // d(L_f U)/d phi(0) by central differences through the segment head.
      const Eigen::VectorXd x = seg.current();
      const double step = 1e-6 * (1.0 + x.norm());
      Eigen::VectorXd g(x.size());
      for (int i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        g(i) = (lfu(seg.with_current(xp)) - lfu(seg.with_current(xm))) / (2.0 * step);
      }
      return Eigen::VectorXd(a * t.H.transpose() + b * g);
    };
  }

  SlidingSurface out;
  out.combiner_ = Combiner::additive([](double v) { return v; }, [](double) { return 1.0; },
                                     [](double) { return 0.0; }, [](double) { return 0.0; });
  out.lyap_ = std::move(composed);
  out.barrier_ = SurfacePart::zero(sys.n);
  out.state_based_ = false;  // value reads history through f
  return out;
}

}  // namespace tdsafe
