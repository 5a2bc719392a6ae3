#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/dde.hpp"
#include "tdsafe/history.hpp"
#include "tdsafe/lyapunov.hpp"
#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

/// Safe-set description h >= 0. Either a state function h(x) with gradient
/// or a smoothly separable functional h1(phi(0)) + h2(phi) with an
/// invariant Dini derivative for the tail part.
struct SafeSetFunction {
  enum class Kind { kState, kFunctional };

  Kind kind = Kind::kState;
  // kState
  ScalarField h;
  GradientField grad_h;
  // kFunctional
  ScalarField h1;
  GradientField grad_h1;
  std::function<double(const HistorySegment&)> h2;
  std::function<double(const HistorySegment&)> dplus_h2;

  static SafeSetFunction state(ScalarField h, GradientField grad_h);
  static SafeSetFunction functional(ScalarField h1, GradientField grad_h1,
                                    std::function<double(const HistorySegment&)> h2,
                                    std::function<double(const HistorySegment&)> dplus_h2);

  double value_at_state(const Eigen::VectorXd& x) const;   // kState only
  double value(const HistorySegment& seg) const;           // both kinds
};

enum class SetRegion { kInterior, kBoundary, kExterior };

struct Membership {
  SetRegion region;
  double h;
};

/// Classify by the sign of h with boundary tolerance 1e-9.
Membership membership(const SafeSetFunction& ss, const Eigen::VectorXd& x);
Membership membership(const SafeSetFunction& ss, const HistorySegment& seg);

/// Barrier certificate over a safe set. Reciprocal (R) variants carry the
/// barrier B with the sandwich bounds alpha1(h) <= 1/B <= alpha2(h);
/// zeroing (Z) variants work on h directly. Razumikhin variants are
/// state-based, Krasovskii variants smoothly separable functionals.
struct BarrierCertificate {
  enum class Variant { kReciprocalRazumikhin, kZeroingRazumikhin,
                       kReciprocalKrasovskii, kZeroingKrasovskii };

  Variant variant = Variant::kZeroingRazumikhin;
  SafeSetFunction safe_set;

  // Reciprocal barrier: state form (b, grad_b) or separable form
  // (b1, grad_b1, b2, dplus_b2).
  ScalarField b;
  GradientField grad_b;
  ScalarField b1;
  GradientField grad_b1;
  std::function<double(const HistorySegment&)> b2;
  std::function<double(const HistorySegment&)> dplus_b2;
  std::optional<ComparisonFunction> sandwich_alpha1, sandwich_alpha2;

  // Rate pair; eta is unused by the Krasovskii variants.
  ComparisonFunction gamma;
  std::optional<ComparisonFunction> eta;

  /// Enlarged working set for Z-type conditions; the safe set itself when
  /// absent.
  std::optional<SafeSetFunction> enlarged_set;

  static BarrierCertificate reciprocal_razumikhin(SafeSetFunction ss, ScalarField b,
                                                  GradientField grad_b,
                                                  ComparisonFunction alpha1,
                                                  ComparisonFunction alpha2,
                                                  ComparisonFunction gamma_rr,
                                                  ComparisonFunction eta_rr);
  static BarrierCertificate zeroing_razumikhin(SafeSetFunction ss, ComparisonFunction gamma_rz,
                                               ComparisonFunction eta_rz);
  static BarrierCertificate reciprocal_krasovskii(SafeSetFunction ss, ScalarField b1,
                                                  GradientField grad_b1,
                                                  std::function<double(const HistorySegment&)> b2,
                                                  std::function<double(const HistorySegment&)> dplus_b2,
                                                  ComparisonFunction alpha1,
                                                  ComparisonFunction alpha2,
                                                  ComparisonFunction gamma_kr);
  static BarrierCertificate zeroing_krasovskii(SafeSetFunction ss, ComparisonFunction gamma_kz);
};

struct SandwichReport {
  struct Entry {
    double h;
    double reciprocal;  // 1/B
    bool pass;
    bool skipped;       // sample not interior
  };
  std::vector<Entry> entries;
  double worst_violation = 0.0;
  bool all_pass = true;
};

/// Checks alpha1(h) <= 1/B <= alpha2(h) on interior samples (state-based
/// reciprocal certificates take states, functional ones take segments).
SandwichReport sandwich_check(const BarrierCertificate& cert,
                              const std::vector<Eigen::VectorXd>& samples);
SandwichReport sandwich_check(const BarrierCertificate& cert,
                              const std::vector<HistorySegment>& samples);

/// Signed admissibility margin, negative iff u satisfies the certificate's
/// defining inequality. Reciprocal variants require the evaluation point to
/// be interior.
double barrier_margin(const BarrierCertificate& cert, const ControlAffineDelaySystem& sys,
                      const HistorySegment& seg, const Eigen::VectorXd& u,
                      int refinement = 4);

struct InvarianceReport {
  double min_h = 0.0;
  std::optional<double> first_violation;  // time of first h <= 0, if any
  bool safe() const { return !first_violation.has_value(); }
};

/// Scans a trajectory for loss of forward invariance: uses the named
/// channel when given, else computes h from the recorded states (state-kind
/// safe sets only).
InvarianceReport invariance_monitor(const Trajectory& traj, const SafeSetFunction& ss,
                                    const std::optional<std::string>& channel = std::nullopt);

/// Which side of the warning threshold activates a softmin component.
enum class WarningGate {
  kInsideWarning,  // active when h <= eps (the warning region)
  kLiteral,        // active when h >= eps
};

struct SoftminPart {
  SafeSetFunction h;
  double eps;
};

struct SoftminEval {
  double value;
  std::vector<double> h;        // per part, after the reciprocal floor
  std::vector<bool> gate;
  std::vector<double> b;        // (1 - eps/h)^2, zero when gate off
  std::vector<double> dvalue_dh;
};

/// Core arithmetic of the gated softmin barrier
///   -ln sum_i exp(-gate_i * B_i),  B_i = (1 - eps_i / h_i)^2,
/// with h floored at 1e-12 inside the reciprocal (counted in diag).
SoftminEval softmin_eval(const std::vector<double>& h, const std::vector<double>& eps,
                         WarningGate gate = WarningGate::kInsideWarning,
                         RunDiagnostics* diag = nullptr);

/// Combines several safe-set functions into one softmin barrier functional.
std::function<double(const HistorySegment&)> softmin_barrier(
    std::vector<SoftminPart> parts, WarningGate gate = WarningGate::kInsideWarning,
    std::shared_ptr<RunDiagnostics> diag = nullptr);

}  // namespace tdsafe
