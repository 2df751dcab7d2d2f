#pragma once

#include "hklapse/common.hpp"

#include <optional>
#include <vector>

namespace hklapse {

enum class Regime { undelayed, delayed };

/// Contraction constants and the exponential bound they induce.
///
/// undelayed: C = max{1 - e^{-K T}, 1 - psi0 e^{-K T} alpha_bar},
///            gamma = ln(1/C) / T,
///            bound(t) = d0 e^{-gamma (t - T)}.
/// delayed:   C = max{1 - e^{-K (T + tau)}, 1 - psi0 e^{-K T} alpha_bar},
///            C_tilde = 1 - e^{-K T} (1 - C),
///            gamma = ln(1/C_tilde) / (3 T),
///            bound(t) = d0 e^{-gamma (t - 3 T + tau)}  with d0 = D_0.
struct BoundSet {
  Regime regime = Regime::undelayed;
  double K = 0.0;
  double M0 = 0.0;
  double psi0 = 0.0;
  double T = 0.0;
  double alpha_bar = 0.0;
  double tau = 0.0;
  double C = 0.0;
  std::optional<double> C_tilde;
  double gamma = 0.0;  // the regime's decay rate (gamma or gamma_tilde)
  double d0 = 0.0;     // initial diameter scale: d(0) or D_0
};

BoundSet constants_undelayed(double K, double T, double psi0, double alpha_bar);
BoundSet constants_delayed(double K, double T, double tau, double psi0, double alpha_bar);

double bound_curve(const BoundSet& b, double t);

/// Side-by-side view of the two regimes at tau = 0 with the same C (so
/// gamma = 3 * gamma_tilde exactly): the undelayed estimate dominates.
struct RegimeComparison {
  double C = 0.0;
  double gamma = 0.0;
  double gamma_tilde = 0.0;  // = gamma / 3
  struct Row {
    double t;
    double undelayed_bound;  // e^{-gamma (t - T)}, unit initial diameter
    double delayed_bound;    // e^{-gamma_tilde (t - 3T)}
  };
  std::vector<Row> table;
  bool undelayed_dominates = false;  // undelayed <= delayed on the whole grid
};

RegimeComparison compare_regimes(double K, double T, double psi0, double alpha_bar,
                                 double t_max = 0.0, int grid = 33);

}  // namespace hklapse
