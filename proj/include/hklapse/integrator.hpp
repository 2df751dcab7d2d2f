#pragma once

#include "hklapse/history.hpp"
#include "hklapse/influence.hpp"
#include "hklapse/state.hpp"
#include "hklapse/trajectory.hpp"
#include "hklapse/weight.hpp"

namespace hklapse {

struct SimOptions {
  double h = 1e-3;                 // target step; shrunk so it divides tau exactly
  double t_end = 10.0;
  bool stop_at_consensus = true;   // stop once d(t) < 1e-12 * max(1, d(0))
};

/// v_i = alpha(t) / (N-1) * sum_j psi(x_i, x_j) (x_j - x_i). The j = i term
/// vanishes, so the sum runs over all j.
Mat rhs_undelayed(double t, const Mat& x, const InfluenceSpec& psi, const WeightSpec& alpha);
Mat rhs_undelayed(const OpinionState& state, const InfluenceSpec& psi, const WeightSpec& alpha);

/// v_i = alpha(t) / (N-1) * sum_{j != i} psi(x_i(t), x_j(t-tau)) (x_j(t-tau) - x_i(t)).
Mat rhs_delayed(double t, const Mat& current, const Mat& delayed, const InfluenceSpec& psi,
                const WeightSpec& alpha);

/// The step a run will actually use: the target h, shrunk when tau > 0 so it
/// divides tau exactly.
double effective_step(double tau, double h_target);

/// Classical fixed-step RK4; delayed runs use the method of steps, with
/// stage-time delayed reads served by the cubic dense output of already
/// finished segments. Deterministic and bit-reproducible for a fixed config.
Trajectory simulate(const HistorySpec& history, const InfluenceSpec& psi, const WeightSpec& alpha,
                    double tau, const SimOptions& opt);

/// Dedicated undelayed path (tau = 0); simulate() dispatches here.
Trajectory simulate_undelayed(const Mat& x0, const InfluenceSpec& psi, const WeightSpec& alpha,
                              const SimOptions& opt);

}  // namespace hklapse
