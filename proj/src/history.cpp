#include "tdsafe/history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdsafe {
namespace {

constexpr double kGridTol = 1e-9;

}  // namespace

HistorySegment::HistorySegment(double delay_bound, Eigen::VectorXd constant_value,
                               double final_time)
    : delay_(delay_bound), final_time_(final_time), thetas_{0.0} {
  values_ = constant_value;
  validate();
}

HistorySegment::HistorySegment(double delay_bound, std::vector<double> thetas,
                               Eigen::MatrixXd values, double final_time)
    : delay_(delay_bound),
      final_time_(final_time),
      thetas_(std::move(thetas)),
      values_(std::move(values)) {
  validate();
}

HistorySegment::HistorySegment(double delay_bound, std::vector<double> thetas,
                               Eigen::MatrixXd values, Eigen::MatrixXd derivatives,
                               double final_time)
    : delay_(delay_bound),
      final_time_(final_time),
      thetas_(std::move(thetas)),
      values_(std::move(values)),
      derivs_(std::move(derivatives)) {
  if (derivs_->rows() != values_.rows() || derivs_->cols() != values_.cols()) {
    throw std::invalid_argument("HistorySegment: derivative layout mismatch");
  }
  validate();
}

HistorySegment HistorySegment::sample(double delay_bound, int dimension,
                                      const std::function<Eigen::VectorXd(double)>& phi,
                                      double dt, double final_time) {
  if (dt <= 0.0) throw std::invalid_argument("HistorySegment::sample: dt <= 0");
  const long k = std::lround(delay_bound / dt);
  if (k < 1 || std::abs(k * dt - delay_bound) > kGridTol) {
    throw std::invalid_argument("HistorySegment::sample: dt must divide delay_bound");
  }
  std::vector<double> thetas(k + 1);
  Eigen::MatrixXd values(dimension, k + 1);
  for (long i = 0; i <= k; ++i) {
    thetas[i] = (i == k) ? 0.0 : -delay_bound + i * dt;
    values.col(i) = phi(thetas[i]);
  }
  return HistorySegment(delay_bound, std::move(thetas), std::move(values), final_time);
}

void HistorySegment::validate() const {
  if (delay_ <= 0.0) throw std::invalid_argument("HistorySegment: delay bound must be > 0");
  const auto k = static_cast<long>(thetas_.size());
  if (k == 0 || values_.cols() != k) {
    throw std::invalid_argument("HistorySegment: sample layout mismatch");
  }
  if (k == 1) return;  // constant history carries a single sample at theta = 0
  auto& self = const_cast<HistorySegment&>(*this);
  if (std::abs(thetas_.front() + delay_) > kGridTol || std::abs(thetas_.back()) > kGridTol) {
    throw std::invalid_argument("HistorySegment: samples must span [-delay, 0]");
  }
  self.thetas_.front() = -delay_;
  self.thetas_.back() = 0.0;
  for (long i = 1; i < k; ++i) {
    if (thetas_[i] <= thetas_[i - 1]) {
      throw std::invalid_argument("HistorySegment: sample offsets must strictly increase");
    }
  }
}

HistorySegment HistorySegment::with_final_time(double t) const {
  HistorySegment out(*this);
  out.final_time_ = t;
  return out;
}

Eigen::VectorXd HistorySegment::interpolate(int interval, double theta) const {
  Eigen::VectorXd out(dimension());
  interpolate_into(interval, theta, out);
  return out;
}

void HistorySegment::interpolate_into(int interval, double theta, Eigen::VectorXd& out) const {
  const double t0 = thetas_[interval];
  const double t1 = thetas_[interval + 1];
  const double h = t1 - t0;
  const double s = (theta - t0) / h;
  const auto v0 = values_.col(interval);
  const auto v1 = values_.col(interval + 1);
  if (!derivs_) {
    out = v0 + s * (v1 - v0);
    return;
  }
  const auto d0 = derivs_->col(interval);
  const auto d1 = derivs_->col(interval + 1);
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  out = h00 * v0 + (h10 * h) * d0 + h01 * v1 + (h11 * h) * d1;
}

Eigen::VectorXd HistorySegment::eval(double theta) const {
  if (theta < -delay_ - kGridTol || theta > kGridTol) {
    throw std::domain_error("HistorySegment::eval: theta outside [-delay, 0]");
  }
  if (is_constant()) return values_.col(0);
  theta = std::clamp(theta, -delay_, 0.0);
  // Locate the interval; snap to stored samples so eval is exact there.
  auto it = std::lower_bound(thetas_.begin(), thetas_.end(), theta);
  auto idx = static_cast<long>(it - thetas_.begin());
  if (idx < static_cast<long>(thetas_.size()) && std::abs(thetas_[idx] - theta) <= kGridTol) {
    return values_.col(idx);
  }
  if (idx > 0 && std::abs(thetas_[idx - 1] - theta) <= kGridTol) {
    return values_.col(idx - 1);
  }
  return interpolate(static_cast<int>(idx - 1), theta);
}

double HistorySegment::sup_norm(int refinement) const {
  return sup_transform([](const Eigen::VectorXd& v) { return v.norm(); }, refinement);
}

double HistorySegment::sup_transform(
    const std::function<double(const Eigen::VectorXd&)>& scalar_map, int refinement) const {
  if (is_constant()) return scalar_map(values_.col(0));
  if (refinement < 1) refinement = 1;
  Eigen::VectorXd probe(dimension());
  probe = values_.col(0);
  double best = scalar_map(probe);
  const auto k = static_cast<long>(thetas_.size());
  for (long i = 0; i + 1 < k; ++i) {
    for (int j = 1; j <= refinement; ++j) {
      if (j == refinement) {
        probe = values_.col(i + 1);
      } else if (derivs_) {
        const double theta = thetas_[i] + (thetas_[i + 1] - thetas_[i]) * j / refinement;
        interpolate_into(static_cast<int>(i), theta, probe);
      } else {
        // Linear interpolant: probe convex combinations of the endpoints.
        const double s = static_cast<double>(j) / refinement;
        probe = values_.col(i) + s * (values_.col(i + 1) - values_.col(i));
      }
      best = std::max(best, scalar_map(probe));
    }
  }
  return best;
}

double HistorySegment::trapezoid(
    const std::function<double(const Eigen::VectorXd&)>& scalar_map,
    std::optional<double> from_theta) const {
  const double a = from_theta.value_or(-delay_);
  if (a < -delay_ - kGridTol || a > kGridTol) {
    throw std::domain_error("HistorySegment::trapezoid: lower limit outside [-delay, 0]");
  }
  if (is_constant()) return (0.0 - a) * scalar_map(values_.col(0));
  double acc = 0.0;
  double prev_theta = a;
  double prev_val = scalar_map(eval(a));
  const auto k = static_cast<long>(thetas_.size());
  for (long i = 0; i < k; ++i) {
    if (thetas_[i] <= prev_theta + kGridTol) continue;
    const double val = scalar_map(values_.col(i));
    acc += 0.5 * (val + prev_val) * (thetas_[i] - prev_theta);
    prev_theta = thetas_[i];
    prev_val = val;
  }
  return acc;
}

bool HistorySegment::is_zero(double tol) const {
  return values_.cwiseAbs().maxCoeff() <= tol;
}

HistorySegment HistorySegment::advance(
    const std::vector<std::pair<double, Eigen::VectorXd>>& tail) const {
  return advance(tail, {});
}

HistorySegment HistorySegment::advance(
    const std::vector<std::pair<double, Eigen::VectorXd>>& tail,
    const std::vector<Eigen::VectorXd>& tail_derivatives) const {
  if (tail.empty()) return *this;
  if (!tail_derivatives.empty() && tail_derivatives.size() != tail.size()) {
    throw std::invalid_argument("HistorySegment::advance: derivative count mismatch");
  }
  double prev = 0.0;
  for (const auto& [t, v] : tail) {
    if (t <= prev) throw std::invalid_argument("HistorySegment::advance: tail times must increase from 0");
    if (t - prev > delay_ + kGridTol) {
      throw std::invalid_argument("HistorySegment::advance: continuity gap wider than the delay window");
    }
    if (v.size() != dimension()) {
      throw std::invalid_argument("HistorySegment::advance: tail value dimension mismatch");
    }
    prev = t;
  }
  const double shift = tail.back().first;
  const bool keep_derivs = derivs_.has_value() && tail_derivatives.size() == tail.size();
  const int n = dimension();

  // Fast path for the integrator's common step: a single appended sample
  // whose spacing matches the stored uniform grid, so the window slides by
  // exactly one column.
  if (!is_constant() && tail.size() == 1) {
    const double step = thetas_[1] - thetas_[0];
    bool uniform = std::abs(shift - step) <= kGridTol;
    for (size_t i = 1; uniform && i + 1 < thetas_.size(); ++i) {
      uniform = std::abs(thetas_[i + 1] - thetas_[i] - step) <= kGridTol;
    }
    if (uniform) {
      const long k = values_.cols();
      Eigen::MatrixXd out_v(n, k);
      out_v.leftCols(k - 1) = values_.rightCols(k - 1);
      out_v.col(k - 1) = tail[0].second;
      if (keep_derivs) {
        Eigen::MatrixXd out_d(n, k);
        out_d.leftCols(k - 1) = derivs_->rightCols(k - 1);
        out_d.col(k - 1) = tail_derivatives[0];
        return HistorySegment(delay_, thetas_, std::move(out_v), std::move(out_d),
                              final_time_ + shift);
      }
      return HistorySegment(delay_, thetas_, std::move(out_v), final_time_ + shift);
    }
  }

  // General path over the combined timeline (old samples, then tail) in
  // shifted coordinates. A constant segment contributes its two window
  // endpoints so the bridge to the tail interpolates from the right place.
  const long old_count = is_constant() ? 2 : static_cast<long>(thetas_.size());
  const long total = old_count + static_cast<long>(tail.size());
  auto time_at = [&](long i) -> double {
    if (i < old_count) {
      if (is_constant()) return (i == 0 ? -delay_ : 0.0) - shift;
      return thetas_[i] - shift;
    }
    return tail[i - old_count].first - shift;
  };
  auto value_at = [&](long i) -> Eigen::Ref<const Eigen::VectorXd> {
    if (i < old_count) return values_.col(is_constant() ? 0 : i);
    return tail[i - old_count].second;
  };
  auto deriv_at = [&](long i) -> Eigen::Ref<const Eigen::VectorXd> {
    if (i < old_count) return derivs_->col(is_constant() ? 0 : i);
    return tail_derivatives[i - old_count];
  };

  long first = 0;
  while (first + 1 < total && time_at(first + 1) <= -delay_ + kGridTol) ++first;
  const bool synthesize = time_at(first) < -delay_ - kGridTol;

  const long count = total - first;
  std::vector<double> out_t;
  out_t.reserve(count);
  Eigen::MatrixXd out_v(n, count);
  std::optional<Eigen::MatrixXd> out_d;
  if (keep_derivs) out_d.emplace(n, count);

  long col = 0;
  if (synthesize) {
    // Interpolate the straddling pair onto the window start.
    const double t0 = time_at(first), t1 = time_at(first + 1);
    const double h = t1 - t0;
    const double s = (-delay_ - t0) / h;
    if (keep_derivs) {
      const double s2 = s * s, s3 = s2 * s;
      out_v.col(col) = (2 * s3 - 3 * s2 + 1) * value_at(first) +
                       ((s3 - 2 * s2 + s) * h) * deriv_at(first) +
                       (-2 * s3 + 3 * s2) * value_at(first + 1) +
                       ((s3 - s2) * h) * deriv_at(first + 1);
      out_d->col(col) = ((6 * s2 - 6 * s) / h) * value_at(first) +
                        (3 * s2 - 4 * s + 1) * deriv_at(first) +
                        ((6 * s - 6 * s2) / h) * value_at(first + 1) +
                        (3 * s2 - 2 * s) * deriv_at(first + 1);
    } else {
      out_v.col(col) = value_at(first) + s * (value_at(first + 1) - value_at(first));
    }
    out_t.push_back(-delay_);
    ++col;
    ++first;
  }
  for (long i = first; i < total; ++i) {
    const double t = time_at(i);
    out_t.push_back(std::abs(t + delay_) <= kGridTol ? -delay_
                    : std::abs(t) <= kGridTol        ? 0.0
                                                     : t);
    out_v.col(col) = value_at(i);
    if (keep_derivs) out_d->col(col) = deriv_at(i);
    ++col;
  }

  if (keep_derivs) {
    return HistorySegment(delay_, std::move(out_t), std::move(out_v), std::move(*out_d),
                          final_time_ + shift);
  }
  return HistorySegment(delay_, std::move(out_t), std::move(out_v), final_time_ + shift);
}

HistorySegment HistorySegment::with_current(const Eigen::VectorXd& x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("HistorySegment::with_current: dimension mismatch");
  }
  if (is_constant()) {
    // Expand so only the head changes; the past keeps the old value.
    std::vector<double> ts{-delay_, 0.0};
    Eigen::MatrixXd vals(dimension(), 2);
    vals.col(0) = values_.col(0);
    vals.col(1) = x;
    return HistorySegment(delay_, std::move(ts), std::move(vals), final_time_);
  }
  HistorySegment out(*this);
  out.values_.col(out.values_.cols() - 1) = x;
  return out;
}

HistorySegment HistorySegment::constant_like(const Eigen::VectorXd& x) const {
  return HistorySegment(delay_, x, final_time_);
}

}  // namespace tdsafe
