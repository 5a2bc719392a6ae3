#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/barrier.hpp"
#include "tdsafe/dde.hpp"
#include "tdsafe/history.hpp"
#include "tdsafe/lyapunov.hpp"
#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
inline double psgn(double v) { return v >= 0.0 ? 1.0 : 0.0; }

/// Raised when the input direction is tangent to the surface level set
/// (|G| below the transversality floor), violating the standing
/// transversality assumption of the sliding-mode construction.
struct TransversalityError : std::runtime_error {
  explicit TransversalityError(double g_norm, double floor)
      : std::runtime_error("transversality assumption violated: |G| = " + std::to_string(g_norm) +
                           " below floor " + std::to_string(floor)) {}
};

/// One side of a sliding-surface combination: a scalar functional with its
/// head gradient (d/d phi(0) of the state-dependent part) and the invariant
/// Dini derivative of the functional remainder. state_value is set when the
/// side is a plain state function, enabling pointwise window evaluation.
struct SurfacePart {
  std::function<double(const HistorySegment&)> value;
  std::function<Eigen::VectorXd(const HistorySegment&)> head_gradient;
  std::function<double(const HistorySegment&)> tail_derivative;  // empty -> 0
  ScalarField state_value;                                       // optional

  static SurfacePart from_state(ScalarField v, GradientField grad);
  static SurfacePart from_certificate(const RazumikhinCertificate& cert);
  static SurfacePart from_certificate(const KrasovskiiCertificate& cert);
  /// Reciprocal barrier of a state safe set: B = 1/h.
  static SurfacePart reciprocal_of(const SafeSetFunction& ss);
  static SurfacePart zero(int dimension);
};

/// Combination rule Upsilon(V, B) with analytic partials.
struct Combiner {
  std::function<double(double, double)> value;
  std::function<double(double, double)> dv;
  std::function<double(double, double)> db;

  struct LinearShape { double a, b, c; };
  std::optional<LinearShape> linear_shape;  // set for the linear combiner

  /// a*V - b*B + c with a, b, c > 0.
  static Combiner linear(double a, double b, double c);
  /// alpha(V) + beta(B); derivative closures must match.
  static Combiner additive(std::function<double(double)> alpha,
                           std::function<double(double)> dalpha,
                           std::function<double(double)> beta,
                           std::function<double(double)> dbeta);
  static Combiner custom(std::function<double(double, double)> value,
                         std::function<double(double, double)> dv,
                         std::function<double(double, double)> db);
};

/// The four terms of D+U = F + G u + L at a segment.
struct SurfaceTerms {
  Eigen::RowVectorXd H;  // 1 x n
  double F = 0.0;
  Eigen::RowVectorXd G;  // 1 x m
  double L = 0.0;
};

/// Sliding surface functional U(phi) = Upsilon(V(phi), B(phi)) over one
/// stabilization side and one barrier side (any mix of Razumikhin and
/// Krasovskii parts).
class SlidingSurface {
 public:
  SlidingSurface() = default;
  static SlidingSurface combine(Combiner combiner, SurfacePart lyapunov_part,
                                SurfacePart barrier_part);

  double value(const HistorySegment& seg) const;
  /// W = U^2 / 2, the reaching functional.
  double reaching_value(const HistorySegment& seg) const;
  SurfaceTerms terms(const ControlAffineDelaySystem& sys, const HistorySegment& seg) const;

  /// U evaluated pointwise at a window state; uses the parts' state maps
  /// when available, else a constant segment carrying ref's delay bound and
  /// final time.
  double value_at_state(const HistorySegment& ref, const Eigen::VectorXd& x) const;
  /// sup over the window of |U(phi(theta))| evaluated pointwise.
  double window_sup_abs(const HistorySegment& seg, int refinement = 4) const;

  bool state_based() const { return state_based_; }
  const std::optional<Combiner::LinearShape>& linear_shape() const { return linear_shape_; }

 private:
  friend SlidingSurface second_order_surface(const SlidingSurface&, const ControlAffineDelaySystem&,
                                             double, double,
                                             std::function<Eigen::RowVectorXd(const HistorySegment&)>);
  Combiner combiner_;
  SurfacePart lyap_, barrier_;
  bool state_based_ = false;
  std::optional<Combiner::LinearShape> linear_shape_;
};

/// The reaching-term schedules of the sliding-mode law.
class GainSpec {
 public:
  enum class Variant { kSign, kSigmoid, kRazumikhin, kKrasovskii };

  /// K sgn(U).
  static GainSpec sign(double k);
  /// K U / (|U| + eps), the continuous sign replacement.
  static GainSpec sigmoid(double k, double eps);
  /// K1 U(phi(0)) - alpha(|U(phi)|^2) / U(phi(0)) with 0 < alpha(v) < K1 v;
  /// the gain is zeroed inside the sliding band |U(phi(0))| <= 1e-9.
  static GainSpec razumikhin(double k1, ComparisonFunction alpha);
  /// K1 U(phi).
  static GainSpec krasovskii(double k1);

  Variant variant() const { return variant_; }
  double k() const { return k_; }
  double eps() const { return eps_; }
  double alpha(double v) const { return alpha_(v); }  // razumikhin variant only
  double reaching_term(const SlidingSurface& surf, const HistorySegment& seg) const;

 private:
  Variant variant_ = Variant::kSign;
  double k_ = 0.0;
  double eps_ = 0.0;
  ComparisonFunction alpha_;
};

struct SmcOptions {
  double transversality_floor = 1e-8;
  /// Clamp |G|^2 at the floor instead of throwing; meant for closed-loop
  /// runs where the surface gradient can transiently degenerate.
  bool clamp_at_floor = false;
  int refinement = 4;
};

struct JDecomposition {
  Eigen::MatrixXd M, J1, J2, J3;
};

/// Projection matrix M = I - g G^T H / |G|^2 and its skew/symmetric
/// decomposition: J2 skew, J3 symmetric, J1 = -2 J2, with
/// M f = J1 H^T, (I - M) f = (J2 + J3) H^T and f = (J3 - J2) H^T.
JDecomposition j_decomposition(const ControlAffineDelaySystem& sys, const HistorySegment& seg,
                               const Eigen::RowVectorXd& H, double transversality_floor = 1e-8);

double surface_eval(const SlidingSurface& surf, const HistorySegment& seg);
SurfaceTerms surface_terms(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                           const HistorySegment& seg);

/// u_e = G^T (H J3 H^T + L) / (-|G|^2); renders the surface invariant.
Eigen::VectorXd equivalent_control(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                                   const HistorySegment& seg, const SmcOptions& options = {},
                                   RunDiagnostics* diag = nullptr);

/// Full sliding-mode law u = G^T (H J3 H^T + L + K) / (-|G|^2).
Eigen::VectorXd smc_controller(const SlidingSurface& surf, const ControlAffineDelaySystem& sys,
                               const GainSpec& gain, const HistorySegment& seg,
                               const SmcOptions& options = {}, RunDiagnostics* diag = nullptr);

/// Packages the law as a closed-loop controller with floor clamping on.
Controller make_smc_controller(SlidingSurface surf, ControlAffineDelaySystem sys, GainSpec gain,
                               SmcOptions options, std::shared_ptr<RunDiagnostics> diag = nullptr);

struct SurfaceValidityReport {
  struct Condition {
    std::string name;
    bool checked = false;
    bool pass = false;
    bool degenerate = false;  // equality within tolerance
    double margin = 0.0;
  };
  Condition initial_bound;      // |U(xi)| < c, linear combiners
  Condition boundary_dominance; // |U| on boundary samples >= |U| along xi
  Condition boundary_growth;    // U on boundary samples >= U(xi)
  Condition roots_interior;     // no boundary sample with U = 0
};

/// Checks the surface-construction sufficient conditions against the
/// initial segment and a set of safe-set boundary samples.
SurfaceValidityReport surface_validity(const SlidingSurface& surf, const HistorySegment& xi,
                                       const std::vector<HistorySegment>& boundary_samples,
                                       int refinement = 4);

/// Relative-degree-2 composition a U + b L_f U for state-based surfaces.
/// The head gradient of L_f U is taken by finite differences through the
/// segment head unless an exact closure is supplied.
SlidingSurface second_order_surface(
    const SlidingSurface& surf, const ControlAffineDelaySystem& sys, double a, double b,
    std::function<Eigen::RowVectorXd(const HistorySegment&)> grad_lfu = nullptr);

}  // namespace tdsafe
