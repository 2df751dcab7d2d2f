#include "hklapse/theory.hpp"

#include <cmath>

namespace hklapse {

namespace {

void check_domain(double K, double T, double psi0, double alpha_bar, double tau) {
  require(std::isfinite(K) && K > 0.0, "need K > 0");
  require(std::isfinite(T) && T > 0.0, "need T > 0");
  require(std::isfinite(psi0) && psi0 > 0.0 && psi0 <= K * (1.0 + 1e-12),
          "need psi0 in (0, K]");
  require(std::isfinite(alpha_bar) && alpha_bar > 0.0 && alpha_bar <= T * (1.0 + 1e-12),
          "need alpha_bar in (0, T]");
  require(std::isfinite(tau) && tau >= 0.0, "need tau >= 0");
}

void check_contraction(double C) {
  if (!(C > 0.0 && C < 1.0))
    throw std::domain_error("degenerate contraction constant: C = " + std::to_string(C) +
                            " is not in (0, 1)");
}

}  // namespace

BoundSet constants_undelayed(double K, double T, double psi0, double alpha_bar) {
  check_domain(K, T, psi0, alpha_bar, 0.0);
  BoundSet b;
  b.regime = Regime::undelayed;
  b.K = K;
  b.T = T;
  b.psi0 = psi0;
  b.alpha_bar = alpha_bar;
  b.C = std::max(1.0 - std::exp(-K * T), 1.0 - psi0 * std::exp(-K * T) * alpha_bar);
  check_contraction(b.C);
  b.gamma = std::log(1.0 / b.C) / T;
  return b;
}

BoundSet constants_delayed(double K, double T, double tau, double psi0, double alpha_bar) {
  check_domain(K, T, psi0, alpha_bar, tau);
  BoundSet b;
  b.regime = Regime::delayed;
  b.K = K;
  b.T = T;
  b.tau = tau;
  b.psi0 = psi0;
  b.alpha_bar = alpha_bar;
  b.C = std::max(1.0 - std::exp(-K * (T + tau)), 1.0 - psi0 * std::exp(-K * T) * alpha_bar);
  check_contraction(b.C);
  const double ct = 1.0 - std::exp(-K * T) * (1.0 - b.C);
  check_contraction(ct);
  b.C_tilde = ct;
  b.gamma = std::log(1.0 / ct) / (3.0 * T);
  return b;
}

double bound_curve(const BoundSet& b, double t) {
  require(std::isfinite(t) && t >= 0.0, "bound curve is defined for t >= 0");
  const double offset = b.regime == Regime::undelayed ? b.T : 3.0 * b.T - b.tau;
  return b.d0 * std::exp(-b.gamma * (t - offset));
}

RegimeComparison compare_regimes(double K, double T, double psi0, double alpha_bar, double t_max,
                                 int grid) {
  const BoundSet und = constants_undelayed(K, T, psi0, alpha_bar);
  RegimeComparison cmp;
  cmp.C = und.C;
  cmp.gamma = und.gamma;
  // tau = 0 lets the three-window constant be chosen equal to C, so the
  // delayed rate is exactly a third of the undelayed one
  cmp.gamma_tilde = und.gamma / 3.0;
  if (t_max <= 0.0) t_max = 10.0 * T;
  grid = std::max(grid, 2);
  cmp.undelayed_dominates = true;
  cmp.table.reserve(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    const double t = t_max * i / (grid - 1);
    const double bu = std::exp(-cmp.gamma * (t - T));
    const double bd = std::exp(-cmp.gamma_tilde * (t - 3.0 * T));
    cmp.table.push_back({t, bu, bd});
    if (bu > bd * (1.0 + 1e-12)) cmp.undelayed_dominates = false;
  }
  return cmp;
}

}  // namespace hklapse
