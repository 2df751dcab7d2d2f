#pragma once

// Test-side oracles, independent of the library's integration and transport
// paths: a first-order delayed integrator on an aligned grid, closed-form
// solutions for the two-agent system, and tiny brute-force couplings.

#include "hklapse/common.hpp"
#include "hklapse/influence.hpp"
#include "hklapse/weight.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using hklapse::InfluenceSpec;
using hklapse::Mat;
using hklapse::Vec;
using hklapse::WeightSpec;

// Explicit Euler for dx_i/dt = alpha(t)/(N-1) sum_{j!=i} psi(x_i(t), x_j(t-tau)) (x_j(t-tau) - x_i(t)).
// tau = m*h exactly; delayed reads are node reads, so no interpolation enters.
// Returns states at every node on [-tau, t_end].
inline std::vector<Mat> euler_delayed(const std::function<Mat(double)>& history,
                                      const InfluenceSpec& psi, const WeightSpec& alpha,
                                      double tau, int m, double t_end) {
  const double h = tau / m;
  const auto steps = static_cast<std::size_t>(std::llround(std::ceil(t_end / h - 1e-9)));
  std::vector<Mat> xs;
  xs.reserve(m + steps + 1);
  for (int k = 0; k <= m; ++k) xs.push_back(history((static_cast<double>(k) - m) * h));
  const auto n = xs[0].cols();
  for (std::size_t k = static_cast<std::size_t>(m); k < static_cast<std::size_t>(m) + steps; ++k) {
    const double t = (static_cast<double>(k) - m) * h;
    const Mat& cur = xs[k];
    const Mat& del = xs[k - static_cast<std::size_t>(m)];
    Mat v = Mat::Zero(cur.rows(), cur.cols());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        v.col(i) += psi(Vec(cur.col(i)), Vec(del.col(j))) * (del.col(j) - cur.col(i));
      }
    v *= alpha(t) / static_cast<double>(n - 1);
    xs.push_back(cur + h * v);
  }
  return xs;
}

// Two agents, psi == 1, alpha == 1, tau = 0, x0 = (0, 1): the difference
// obeys y' = -2y, so d(t) = e^{-2t}.
inline double two_agent_diameter(double t) { return std::exp(-2.0 * t); }

// W1 between two 2-atom uniform measures on R, by enumerating both couplings.
inline double w1_two_atoms(double a0, double a1, double b0, double b1) {
  const double direct = 0.5 * (std::abs(a0 - b0) + std::abs(a1 - b1));
  const double crossed = 0.5 * (std::abs(a0 - b1) + std::abs(a1 - b0));
  return std::min(direct, crossed);
}

// Piecewise-linear integral of the ramped square wave over [a, b]
// (phase 0), by summing breakpoint trapezoids. Independent of the library's
// Simpson path.
inline double square_wave_integral(double period, double duty, double ramp, double a, double b) {
  auto value = [&](double t) {
    double u = std::fmod(t, period);
    if (u < 0.0) u += period;
    const double on = duty * period;
    if (u <= on) return 1.0;
    if (u <= on + ramp) return 1.0 - (u - on) / ramp;
    if (u < period - ramp) return 0.0;
    return (u - (period - ramp)) / ramp;
  };
  // integrate trapezoidally between consecutive breakpoints
  std::vector<double> cuts{a};
  const double on = duty * period;
  for (double base = std::floor(a / period) * period; base < b + period; base += period)
    for (const double off : {0.0, on, on + ramp, period - ramp})
      if (const double c = base + off; c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i)
    total += 0.5 * (value(cuts[i - 1]) + value(cuts[i])) * (cuts[i] - cuts[i - 1]);
  return total;
}

}  // namespace oracles
