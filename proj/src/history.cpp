#include "hklapse/history.hpp"

#include <algorithm>
#include <cmath>

namespace hklapse {

HistorySpec HistorySpec::Point(Mat x0) {
  require(x0.size() > 0 && x0.allFinite(), "point history must be finite and nonempty");
  HistorySpec h;
  h.kind_ = HistoryKind::point;
  h.states_.push_back(std::move(x0));
  return h;
}

HistorySpec HistorySpec::Constant(Mat x0) {
  require(x0.size() > 0 && x0.allFinite(), "constant history must be finite and nonempty");
  Mat copy = x0;
  HistorySpec h;
  h.kind_ = HistoryKind::function;
  h.constant_ = true;
  h.states_.push_back(std::move(x0));
  h.eval_ = [copy](double) { return copy; };
  return h;
}

HistorySpec HistorySpec::Function(Evaluator f) {
  require(static_cast<bool>(f), "function history needs an evaluator");
  HistorySpec h;
  h.kind_ = HistoryKind::function;
  h.eval_ = std::move(f);
  return h;
}

HistorySpec HistorySpec::Sampled(std::vector<double> times, std::vector<Mat> states) {
  require(times.size() == states.size() && times.size() >= 2,
          "sampled history needs >= 2 samples");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "sampled history times must increase");
  require(times.back() == 0.0 || std::abs(times.back()) < 1e-12,
          "sampled history must end at t = 0");
  for (const Mat& s : states) require(s.allFinite(), "sampled history has non-finite state");
  HistorySpec h;
  h.kind_ = HistoryKind::sampled;
  h.times_ = std::move(times);
  h.states_ = std::move(states);
  return h;
}

namespace {

// Catmull-Rom style tangent at sample i of a non-uniform grid.
Mat sample_tangent(const std::vector<double>& ts, const std::vector<Mat>& xs, std::size_t i) {
  const std::size_t n = ts.size();
  if (i == 0) return (xs[1] - xs[0]) / (ts[1] - ts[0]);
  if (i + 1 == n) return (xs[n - 1] - xs[n - 2]) / (ts[n - 1] - ts[n - 2]);
  return (xs[i + 1] - xs[i - 1]) / (ts[i + 1] - ts[i - 1]);
}

}  // namespace

Mat HistorySpec::at(double t) const {
  switch (kind_) {
    case HistoryKind::point:
      return states_.front();
    case HistoryKind::function:
      return eval_(t);
    case HistoryKind::sampled: {
      const double lo = times_.front(), hi = times_.back();
      t = std::clamp(t, lo, hi);
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      std::size_t i = static_cast<std::size_t>(it - times_.begin());
      i = std::clamp<std::size_t>(i, 1, times_.size() - 1);
      const double dt = times_[i] - times_[i - 1];
      const double th = (t - times_[i - 1]) / dt;
      const Mat m0 = sample_tangent(times_, states_, i - 1) * dt;
      const Mat m1 = sample_tangent(times_, states_, i) * dt;
      const double h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
      const double h10 = th * (1.0 - th) * (1.0 - th);
      const double h01 = th * th * (3.0 - 2.0 * th);
      const double h11 = th * th * (th - 1.0);
      return h00 * states_[i - 1] + h10 * m0 + h01 * states_[i] + h11 * m1;
    }
  }
  throw std::logic_error("unreachable");
}

Mat HistorySpec::derivative_at(double t, double tau) const {
  if (kind_ == HistoryKind::point || constant_)
    return Mat::Zero(states_.front().rows(), states_.front().cols());
  const double lo = -tau, hi = 0.0;
  const double step = std::max(1e-6 * std::max(tau, 1.0), 1e-9);
  if (t - step >= lo && t + step <= hi)
    return (at(t + step) - at(t - step)) / (2.0 * step);
  if (t + 2.0 * step <= hi)  // one-sided, second order
    return (-3.0 * at(t) + 4.0 * at(t + step) - at(t + 2.0 * step)) / (2.0 * step);
  if (t - 2.0 * step >= lo)
    return (3.0 * at(t) - 4.0 * at(t - step) + at(t - 2.0 * step)) / (2.0 * step);
  return (at(hi) - at(lo)) / std::max(hi - lo, step);
}

}  // namespace hklapse
