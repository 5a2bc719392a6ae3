#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tdsafe/history.hpp"
#include "tdsafe/sysmodel.hpp"

namespace tdsafe {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using GradientField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central finite-difference gradient with step 1e-6 * (1 + |x|), the
/// fallback when a certificate does not supply an analytic gradient.
Eigen::VectorXd finite_difference_gradient(const ScalarField& f, const Eigen::VectorXd& x);

/// Razumikhin-type stabilization certificate: a state function V with
/// class-K bounds. The classic variant carries (gamma_c, rho) and is used
/// with the domination controller under the Razumikhin condition; the
/// steepest-descent variant carries (gamma_r, eta_r) with gamma_r - eta_r
/// of class K and feeds the universal controller.
struct RazumikhinCertificate {
  enum class Variant { kClassic, kSteepestDescent };

  Variant variant = Variant::kSteepestDescent;
  ScalarField value;         // V
  GradientField gradient;    // dV/dx; empty -> finite differences (flagged)
  ComparisonFunction alpha1, alpha2;

  // kClassic
  std::optional<ComparisonFunction> gamma_c;
  std::optional<ComparisonFunction> rho;  // rho > Id
  // kSteepestDescent
  std::optional<ComparisonFunction> gamma_r;
  std::optional<ComparisonFunction> eta_r;

  bool uses_fd_gradient() const { return !gradient; }
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const;

  static RazumikhinCertificate classic(ScalarField v, GradientField grad,
                                       ComparisonFunction alpha1, ComparisonFunction alpha2,
                                       ComparisonFunction gamma_c, ComparisonFunction rho);
  static RazumikhinCertificate steepest_descent(ScalarField v, GradientField grad,
                                                ComparisonFunction alpha1,
                                                ComparisonFunction alpha2,
                                                ComparisonFunction gamma_r,
                                                ComparisonFunction eta_r);
};

/// Krasovskii-type stabilization certificate V(phi) = V1(phi(0)) + V2(phi)
/// with an invariant Dini derivative for the functional part.
struct KrasovskiiCertificate {
  ScalarField v1;
  GradientField grad_v1;
  std::function<double(const HistorySegment&)> v2;
  std::function<double(const HistorySegment&)> dplus_v2;
  ComparisonFunction alpha1, alpha2;
  ComparisonFunction gamma_lk;

  double value(const HistorySegment& seg) const { return v1(seg.current()) + v2(seg); }
  Eigen::VectorXd grad1(const Eigen::VectorXd& x) const;
  bool uses_fd_gradient() const { return !grad_v1; }
};

/// Sontag's pointing formula: 0 when q = 0, otherwise
/// -q (p + sqrt(p^2 + lambda |q|^4)) / |q|^2.
Eigen::VectorXd sontag_kappa(double lambda, double p, const Eigen::VectorXd& q);

/// Universal stabilizing controller for the steepest-descent Razumikhin
/// certificate: kappa applied to a(phi) = LfV + gamma_r(V(x)) - eta_r(sup V)
/// and b = (LgV)^T. Returns zero on the zero segment.
Eigen::VectorXd universal_controller(const RazumikhinCertificate& cert, double lambda,
                                     const ControlAffineDelaySystem& sys,
                                     const HistorySegment& seg, int refinement = 4);

/// Krasovskii counterpart with a(phi) = LfV1 + D+V2 + gamma_lk(V(phi)).
Eigen::VectorXd universal_controller(const KrasovskiiCertificate& cert, double lambda,
                                     const ControlAffineDelaySystem& sys,
                                     const HistorySegment& seg);

/// Domination redesign law u = -gain(V(phi(0))) (LgV)^T for the classic
/// certificate.
Eigen::VectorXd domination_controller(const RazumikhinCertificate& cert,
                                      const std::function<double(double)>& dominating_gain,
                                      const ControlAffineDelaySystem& sys,
                                      const HistorySegment& seg);

/// rho(V(phi(0))) >= sup of V along the window.
bool razumikhin_condition(const RazumikhinCertificate& cert, const HistorySegment& seg,
                          const ComparisonFunction& rho, int refinement = 4);

/// Signed decrease margin; < 0 iff u is admissible for the certificate's
/// defining inequality. Steepest-descent Razumikhin and Krasovskii
/// certificates only. The zero segment reports 0 (vacuous boundary).
double decrease_margin(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                       const HistorySegment& seg, const Eigen::VectorXd& u,
                       int refinement = 4);
double decrease_margin(const KrasovskiiCertificate& cert, const ControlAffineDelaySystem& sys,
                       const HistorySegment& seg, const Eigen::VectorXd& u);

struct ScpReport {
  struct Row {
    double delta;
    double max_input_norm;
  };
  std::vector<Row> rows;
  /// Set when the schedule has at least two entries: true iff max|u|
  /// shrinks with delta (each entry at most twice its predecessor and the
  /// last strictly below the first).
  std::optional<bool> shrinking;
};

/// Samples random segments with sup norm <= delta for each delta in the
/// (decreasing) schedule and records the largest universal-controller
/// output, probing the small control property.
ScpReport scp_probe(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                    const std::vector<double>& delta_schedule, int samples_per_delta,
                    double lambda = 1.0, std::uint64_t seed = 0);

/// Worst-case ratio LfV / |LgV|^2 over sampled segments inside a ball,
/// a falsification probe for the classic certificate's growth condition.
double chi_probe(const RazumikhinCertificate& cert, const ControlAffineDelaySystem& sys,
                 double radius, int samples, std::uint64_t seed = 0);

}  // namespace tdsafe
