#pragma once

#include "hklapse/common.hpp"

#include <functional>
#include <vector>

namespace hklapse {

enum class HistoryKind { point, function, sampled };

/// Initial data: a single state for the undelayed system, or a continuous
/// function on [-tau, 0] for the delayed one.
class HistorySpec {
 public:
  using Evaluator = std::function<Mat(double)>;

  /// tau = 0 only: the initial state itself.
  static HistorySpec Point(Mat x0);
  /// Constant history equal to x0 on [-tau, 0].
  static HistorySpec Constant(Mat x0);
  /// Continuous evaluator t -> d x N state, defined on [-tau, 0].
  static HistorySpec Function(Evaluator f);
  /// Samples on a strictly increasing grid covering [-tau, 0]; interpolated
  /// with a piecewise cubic.
  static HistorySpec Sampled(std::vector<double> times, std::vector<Mat> states);

  HistoryKind kind() const { return kind_; }
  bool is_point() const { return kind_ == HistoryKind::point; }

  /// State at time t in [-tau, 0].
  Mat at(double t) const;
  /// Time derivative at t (one-sided at the segment ends).
  Mat derivative_at(double t, double tau) const;

  const Mat& point_value() const { return states_.front(); }

 private:
  HistorySpec() = default;

  HistoryKind kind_ = HistoryKind::point;
  bool constant_ = false;  // constant histories have exactly zero derivatives
  Evaluator eval_;
  std::vector<double> times_;
  std::vector<Mat> states_;
};

}  // namespace hklapse
