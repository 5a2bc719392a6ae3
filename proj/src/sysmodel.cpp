#include "tdsafe/sysmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace tdsafe {

Eigen::VectorXd eval_dynamics(const ControlAffineDelaySystem& sys,
                              const HistorySegment& seg, const Eigen::VectorXd& u,
                              RunDiagnostics* diag) {
  if (seg.dimension() != sys.n) {
    throw std::invalid_argument("eval_dynamics: segment dimension != n");
  }
  if (u.size() != sys.m) {
    throw std::invalid_argument("eval_dynamics: input dimension != m");
  }
  Eigen::VectorXd uc = u;
  if (sys.input_lo || sys.input_hi) {
    bool clamped = false;
    for (int i = 0; i < sys.m; ++i) {
      const double lo = sys.input_lo ? (*sys.input_lo)(i) : -std::numeric_limits<double>::infinity();
      const double hi = sys.input_hi ? (*sys.input_hi)(i) : std::numeric_limits<double>::infinity();
      if (uc(i) < lo) { uc(i) = lo; clamped = true; }
      if (uc(i) > hi) { uc(i) = hi; clamped = true; }
    }
    if (clamped && diag) ++diag->input_clamps;
  }
  return sys.drift(seg) + sys.input_map(seg) * uc;
}

std::function<Eigen::VectorXd(const HistorySegment&)> discrete_delay_drift(
    std::vector<double> delays,
    std::function<Eigen::VectorXd(const std::vector<Eigen::VectorXd>&)> f0) {
  return [delays = std::move(delays), f0 = std::move(f0)](const HistorySegment& seg) {
    std::vector<Eigen::VectorXd> args;
    args.reserve(delays.size() + 1);
    args.push_back(seg.current());
    for (double tau : delays) args.push_back(seg.eval(-tau));
    return f0(args);
  };
}

ComparisonFunction ComparisonFunction::linear(double k, Kind kind) {
  if (k <= 0.0) throw std::invalid_argument("ComparisonFunction::linear: slope must be > 0");
  ComparisonFunction fn;
  fn.kind_ = kind;
  fn.forward_ = [k](double v) { return k * v; };
  fn.inverse_ = [k](double w) { return w / k; };
  return fn;
}

ComparisonFunction ComparisonFunction::power(double k, double p, Kind kind) {
  if (k <= 0.0 || p <= 0.0) throw std::invalid_argument("ComparisonFunction::power: k, p must be > 0");
  ComparisonFunction fn;
  fn.kind_ = kind;
  if (kind == Kind::kKBar) {
    fn.forward_ = [k, p](double v) {
      return v >= 0.0 ? k * std::pow(v, p) : -k * std::pow(-v, p);
    };
    fn.inverse_ = [k, p](double w) {
      return w >= 0.0 ? std::pow(w / k, 1.0 / p) : -std::pow(-w / k, 1.0 / p);
    };
  } else {
    fn.forward_ = [k, p](double v) { return k * std::pow(v, p); };
    fn.inverse_ = [k, p](double w) { return std::pow(w / k, 1.0 / p); };
  }
  return fn;
}

ComparisonFunction ComparisonFunction::log1p_scaled(double k) {
  if (k <= 0.0) throw std::invalid_argument("ComparisonFunction::log1p_scaled: k must be > 0");
  ComparisonFunction fn;
  fn.kind_ = Kind::kK;  // bounded growth rate, still unbounded, but keep K
  fn.forward_ = [k](double v) { return k * std::log1p(v); };
  fn.inverse_ = [k](double w) { return std::expm1(w / k); };
  return fn;
}

ComparisonFunction ComparisonFunction::custom(std::function<double(double)> forward, Kind kind,
                                              std::function<double(double)> inverse) {
  if (!forward) throw std::invalid_argument("ComparisonFunction::custom: forward map required");
  // Class properties are not enforced here; check_comparison reports them.
  ComparisonFunction fn;
  fn.kind_ = kind;
  fn.forward_ = std::move(forward);
  fn.inverse_ = std::move(inverse);
  return fn;
}

double ComparisonFunction::operator()(double v) const {
  if (!forward_) throw std::logic_error("ComparisonFunction: empty");
  if (kind_ != Kind::kKBar && v < 0.0) {
    throw std::domain_error("ComparisonFunction: class-K argument must be >= 0");
  }
  return forward_(v);
}

double ComparisonFunction::inverse(double w) const {
  if (!inverse_) throw std::logic_error("ComparisonFunction: no inverse available");
  return inverse_(w);
}

ComparisonReport check_comparison(const ComparisonFunction& fn,
                                  const std::vector<double>& grid, double tol) {
  ComparisonReport report;
  report.zero_at_zero = std::abs(fn(0.0)) <= tol;
  report.monotone = true;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    if (fn(grid[i + 1]) <= fn(grid[i])) {
      report.monotone = false;
      report.witnesses.emplace_back(grid[i], grid[i + 1]);
    }
  }
  return report;
}

}  // namespace tdsafe
