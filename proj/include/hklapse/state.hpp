#pragma once

#include "hklapse/common.hpp"
#include "hklapse/pairwise.hpp"

#include <span>

namespace hklapse {

/// Opinions of all agents at one instant. `x` is d x N, one agent per column.
struct OpinionState {
  double t = 0.0;
  Mat x;

  int agents() const { return static_cast<int>(x.cols()); }
  int dim() const { return static_cast<int>(x.rows()); }
};

void validate(const OpinionState& s);

/// d(t): largest pairwise opinion distance.
inline double diameter(const Mat& x) { return max_pairwise_distance(x); }
inline double diameter(const OpinionState& s) { return diameter(s.x); }

/// M0 for a point initial condition: max agent norm.
double compute_M0(const Mat& x0);

/// M0 for a sampled history: max agent norm over all samples.
double compute_M0(std::span<const Mat> history_states);

}  // namespace hklapse
