#include "hklapse/wf.hpp"

#include <algorithm>
#include <cmath>

namespace hklapse {

double integrate_weight(const WeightSpec& spec, double a, double b, int n) {
  require(b >= a, "integration bounds out of order");
  if (b == a) return 0.0;
  if (n % 2 != 0) ++n;
  n = std::max(n, 2);
  const double h = (b - a) / n;
  double odd = 0.0, even = 0.0;
  for (int k = 1; k < n; k += 2) odd += spec(a + k * h);
  for (int k = 2; k < n; k += 2) even += spec(a + k * h);
  return h / 3.0 * (spec(a) + 4.0 * odd + 2.0 * even + spec(b));
}

namespace {

constexpr int kQuadIntervals = 2048;  // >= 1e3 nodes per candidate interval

struct IntervalQuad {
  double value = 0.0;
  double error = 0.0;  // Richardson estimate |S_n - S_{n/2}| / 15
};

IntervalQuad quadrature(const WeightSpec& spec, double a, double b) {
  const double fine = integrate_weight(spec, a, b, kQuadIntervals);
  const double coarse = integrate_weight(spec, a, b, kQuadIntervals / 2);
  return {fine, std::abs(fine - coarse) / 15.0};
}

}  // namespace

WfResult certify_wf(const WeightSpec& spec, double T, double alpha_bar, double horizon,
                    double tau, double grid) {
  require(std::isfinite(T) && T > 0.0, "certify_wf needs T > 0");
  require(std::isfinite(alpha_bar) && alpha_bar > 0.0, "certify_wf needs alpha_bar > 0");
  require(std::isfinite(horizon) && horizon > T, "certify_wf needs horizon > T");
  require(std::isfinite(tau) && tau >= 0.0, "certify_wf needs tau >= 0");
  require(std::isfinite(grid) && grid >= 0.0, "certify_wf needs grid >= 0");
  if (grid > 0.0 && tau > 0.0)
    require(std::abs(tau / grid - std::llround(tau / grid)) <= 1e-9,
            "grid must divide tau for node-aligned certification");

  // tiny slack so integrals that hit alpha_bar exactly certify despite
  // last-ulp quadrature rounding
  const double threshold = alpha_bar * (1.0 - 1e-12) - 1e-14;
  const double bisect_tol = 1e-9 * T;

  std::vector<double> greedy{0.0};
  std::vector<double> integrals;
  double quad_error = 0.0;

  while (greedy.back() + T <= horizon * (1.0 + 1e-12)) {
    const double t0 = greedy.back();
    const double t1 = t0 + T;
    if (integrate_weight(spec, t0, t1, kQuadIntervals) < threshold) {
      const auto q = quadrature(spec, t0, t1);
      return WfFailure{"integral deficit: no t <= t0 + T reaches alpha_bar", t0, t1, q.value,
                       alpha_bar};
    }
    // earliest feasible endpoint; the predicate is monotone in t
    double lo = t0, hi = t1;
    while (hi - lo > bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      if (integrate_weight(spec, t0, mid, kQuadIntervals) >= threshold)
        hi = mid;
      else
        lo = mid;
    }
    double tn = hi;
    if (t1 - tn <= 4.0 * bisect_tol) tn = t1;  // keep exact window ends exact
    if (grid > 0.0) {  // align onto the integration grid; extension only adds mass
      tn = std::ceil(tn / grid - 1e-9) * grid;
      if (tn > horizon * (1.0 + 1e-12)) break;
      if (tn <= t0) tn = t0 + grid;
    }
    const auto q = quadrature(spec, t0, tn);
    greedy.push_back(tn);
    integrals.push_back(q.value);
    quad_error = std::max(quad_error, q.error);
    if (greedy.size() > 1000000)
      return WfFailure{"partition exceeds 1e6 intervals", t0, tn, q.value, alpha_bar};
  }

  if (greedy.size() < 2)
    return WfFailure{"horizon too short to certify a single interval", 0.0, horizon, 0.0,
                     alpha_bar};

  WfCertificate cert;
  cert.requested_T = T;
  cert.alpha_bar = alpha_bar;
  cert.tau = tau;
  cert.quadrature_error = quad_error;

  // ulp-scale slack so node-aligned spacings that equal tau exactly in exact
  // arithmetic are not misclassified
  const double tau_tol = 1e-12 * std::max(1.0, tau);
  if (tau > 0.0) {
    // merge consecutive intervals until spacing >= tau; merged integrals
    // only grow, so the per-interval lower bound is preserved
    cert.partition.push_back(0.0);
    double acc = 0.0;
    for (std::size_t k = 1; k < greedy.size(); ++k) {
      acc += integrals[k - 1];
      if (greedy[k] - cert.partition.back() >= tau - tau_tol) {
        cert.partition.push_back(greedy[k]);
        cert.interval_integrals.push_back(acc);
        acc = 0.0;
      }
    }
    if (cert.partition.size() < 2)
      return WfFailure{"cannot reach spacing >= tau within the horizon", 0.0, horizon,
                       greedy.back(), tau};
    cert.coarsened = cert.partition.size() != greedy.size();
  } else {
    cert.partition = std::move(greedy);
    cert.interval_integrals = std::move(integrals);
  }

  double max_spacing = 0.0, min_spacing = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < cert.partition.size(); ++k) {
    const double s = cert.partition[k] - cert.partition[k - 1];
    max_spacing = std::max(max_spacing, s);
    min_spacing = std::min(min_spacing, s);
  }
  cert.T = max_spacing;
  cert.tau_compatible = tau <= min_spacing + tau_tol;
  return cert;
}

}  // namespace hklapse
