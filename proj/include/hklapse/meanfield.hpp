#pragma once

#include "hklapse/influence.hpp"
#include "hklapse/integrator.hpp"
#include "hklapse/state.hpp"
#include "hklapse/theory.hpp"
#include "hklapse/weight.hpp"
#include "hklapse/wf.hpp"

#include <cstdint>
#include <vector>

namespace hklapse {

/// Atomic probability measure on R^d: point j carries weights[j] >= 0,
/// weights sum to 1 (within 1e-12; normalized on construction).
struct EmpiricalMeasure {
  Mat points;   // d x n
  Vec weights;  // n

  int dim() const { return static_cast<int>(points.rows()); }
  int size() const { return static_cast<int>(points.cols()); }
};

EmpiricalMeasure make_measure(Mat points, Vec weights);
EmpiricalMeasure make_measure(Mat points);  // uniform weights

/// Uniform-weight atoms at the agent opinions.
EmpiricalMeasure empirical(const OpinionState& state);

/// diam(supp mu): largest pairwise atom distance.
double support_diameter(const EmpiricalMeasure& mu);

/// 1-Wasserstein distance. Dispatch: d = 1 via the exact quantile coupling
/// (any weights); d >= 2 equal-size uniform via the exact assignment solver;
/// anything else via the exact transportation solve on the coupling
/// polytope. Supports are capped at 512 atoms each.
double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// The individual routes, exposed so tests can cross-check them.
double wasserstein1_sorted1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double wasserstein1_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
double wasserstein1_flow(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Exact minimum-cost perfect matching value for a dense square cost matrix
/// (shortest augmenting paths, O(n^3)).
double assignment_cost(const Mat& cost);

/// Particle-level study of the continuum model: simulate at each N with
/// i.i.d. initial data from a compactly supported box sampler, check the
/// exponential support-diameter envelope with the rate supplied by the
/// contraction constants, and track the 1-Wasserstein distance between
/// consecutive-N solutions on a shared time grid.
struct StudySpec {
  std::vector<int> N_list;
  int dim = 1;
  InfluenceSpec influence = InfluenceSpec::Constant(1.0);  // constant or radial_power only
  WeightSpec weight = WeightSpec::ConstantOne();
  double tau = 0.0;
  double T = 1.0;
  double alpha_bar = 1.0;
  double horizon = 0.0;  // certification horizon; defaults to t_end + T
  Vec box_low, box_high;  // support of the initial measure
  std::uint64_t seed = 0;
  SimOptions sim;
  int w1_times = 11;               // shared comparison grid size
  double budget = 5e7;             // cap on sum_N N * steps
  double envelope_tol = 1e-8;      // absolute slack on the envelope check
};

struct StudyRow {
  int N;
  double t;
  double dX;
  double envelope;
  double w1_next = std::numeric_limits<double>::quiet_NaN();  // to the next larger N
};

struct StudyInstance {
  int N = 0;
  double gamma_env = 0.0;
  double offset = 0.0;
  double max_history_dX = 0.0;
  double worst_margin = 0.0;  // min over the grid of (envelope - dX)
  bool envelope_pass = false;
  double final_dX = 0.0;
};

struct StudyReport {
  std::vector<StudyRow> rows;
  std::vector<StudyInstance> instances;
  double lipschitz_L = 0.0;
  bool pass = false;
};

StudyReport meanfield_decay_study(const StudySpec& spec);

}  // namespace hklapse
