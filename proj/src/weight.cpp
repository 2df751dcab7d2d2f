#include "hklapse/weight.hpp"

#include <algorithm>
#include <cmath>

namespace hklapse {

WeightSpec WeightSpec::ConstantOne() { return WeightSpec{}; }

WeightSpec WeightSpec::SquareWave(double period, double duty, double phase, double ramp) {
  require(std::isfinite(period) && period > 0.0, "square wave needs period > 0");
  require(std::isfinite(duty) && duty >= 0.0 && duty <= 1.0, "square wave needs duty in [0,1]");
  require(std::isfinite(phase), "square wave phase must be finite");
  WeightSpec s;
  s.family_ = WeightFamily::square_wave;
  s.period_ = period;
  s.duty_ = duty;
  s.phase_ = phase;
  if (ramp <= 0.0) ramp = 1e-3 * period;
  // ramps must fit inside the off-window
  s.ramp_ = std::min(ramp, 0.5 * period * (1.0 - duty));
  return s;
}

WeightSpec WeightSpec::ClippedSinusoid(double period, double floor_value) {
  require(std::isfinite(period) && period > 0.0, "clipped sinusoid needs period > 0");
  require(floor_value >= 0.0 && floor_value <= 1.0, "clipped sinusoid needs floor in [0,1]");
  WeightSpec s;
  s.family_ = WeightFamily::clipped_sinusoid;
  s.period_ = period;
  s.floor_ = floor_value;
  return s;
}

WeightSpec WeightSpec::DropoutSchedule(std::vector<std::pair<double, double>> intervals,
                                       double ramp) {
  double min_len = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    auto [a, b] = intervals[i];
    require(std::isfinite(a) && std::isfinite(b) && a >= 0.0 && b > a,
            "dropout intervals must satisfy 0 <= a < b");
    if (i > 0)
      require(a >= intervals[i - 1].second, "dropout intervals must be sorted and disjoint");
    min_len = std::min(min_len, b - a);
  }
  WeightSpec s;
  s.family_ = WeightFamily::dropout_schedule;
  s.intervals_ = std::move(intervals);
  if (!s.intervals_.empty()) {
    if (ramp <= 0.0) ramp = 1e-3 * min_len;
    s.ramp_ = std::min(ramp, 0.5 * min_len);
  }
  return s;
}

WeightSpec WeightSpec::Custom(Evaluator eval) {
  require(static_cast<bool>(eval), "custom weight needs an evaluator");
  WeightSpec s;
  s.family_ = WeightFamily::custom;
  s.eval_ = std::move(eval);
  return s;
}

double WeightSpec::operator()(double t) const {
  switch (family_) {
    case WeightFamily::constant_one:
      return 1.0;
    case WeightFamily::square_wave: {
      if (duty_ >= 1.0) return 1.0;
      if (duty_ <= 0.0) return 0.0;
      double u = std::fmod(t - phase_, period_);
      if (u < 0.0) u += period_;
      const double on = duty_ * period_;
      if (u <= on) return 1.0;
      if (u <= on + ramp_) return 1.0 - (u - on) / ramp_;
      if (u < period_ - ramp_) return 0.0;
      return (u - (period_ - ramp_)) / ramp_;
    }
    case WeightFamily::clipped_sinusoid:
      return std::max(floor_, 0.5 * (1.0 + std::sin(2.0 * M_PI * t / period_)));
    case WeightFamily::dropout_schedule: {
      for (const auto& [a, b] : intervals_) {
        if (t < a) return 0.0;
        if (t <= b) return std::min({1.0, (t - a) / ramp_, (b - t) / ramp_});
      }
      return 0.0;
    }
    case WeightFamily::custom:
      return eval_(t);
  }
  return 0.0;
}

double eval_weight(const WeightSpec& spec, double t) {
  require(std::isfinite(t) && t >= 0.0, "weight is only defined for t >= 0");
  const double v = spec(t);
  if (!(v >= 0.0 && v <= 1.0))
    throw std::domain_error("weight evaluated outside [0, 1]");
  return v;
}

}  // namespace hklapse
