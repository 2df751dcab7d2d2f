#pragma once

#include "hklapse/common.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace hklapse {

enum class WeightFamily { constant_one, square_wave, clipped_sinusoid, dropout_schedule, custom };

/// The interaction weight alpha: [0, inf) -> [0, 1], continuous. On-off
/// families are realized with linear ramps of small width so continuity
/// holds literally.
class WeightSpec {
 public:
  using Evaluator = std::function<double(double)>;

  static WeightSpec ConstantOne();

  /// One period: value 1 on [0, duty*period], linear ramp down over `ramp`,
  /// 0 until period - ramp, linear ramp back up to 1. The window starts at
  /// t = phase (mod period). ramp <= 0 selects the default 1e-3 * period.
  static WeightSpec SquareWave(double period, double duty, double phase = 0.0, double ramp = 0.0);

  /// max(floor, (1 + sin(2 pi t / period)) / 2).
  static WeightSpec ClippedSinusoid(double period, double floor_value);

  /// 1 on each closed interval (with ramps of width `ramp` eating into the
  /// interval ends), 0 elsewhere. Empty interval list gives alpha == 0.
  static WeightSpec DropoutSchedule(std::vector<std::pair<double, double>> intervals,
                                    double ramp = 0.0);

  static WeightSpec Custom(Evaluator eval);

  WeightFamily family() const { return family_; }
  double operator()(double t) const;

  // parameters, for serialization
  double period() const { return period_; }
  double duty() const { return duty_; }
  double phase() const { return phase_; }
  double ramp() const { return ramp_; }
  double floor_value() const { return floor_; }
  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }

 private:
  WeightSpec() = default;

  WeightFamily family_ = WeightFamily::constant_one;
  double period_ = 1.0, duty_ = 1.0, phase_ = 0.0, ramp_ = 0.0, floor_ = 0.0;
  std::vector<std::pair<double, double>> intervals_;
  Evaluator eval_;
};

/// alpha(t); rejects t < 0 and values outside [0, 1].
double eval_weight(const WeightSpec& spec, double t);

}  // namespace hklapse
