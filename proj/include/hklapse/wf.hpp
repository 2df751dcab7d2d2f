#pragma once

#include "hklapse/weight.hpp"

#include <variant>
#include <vector>

namespace hklapse {

/// A numerically certified instance of the (WF) hypothesis on [0, horizon]:
/// a partition {t_n} with t_0 = 0, spacing at most T, and per-interval
/// integral of alpha at least alpha_bar (up to the reported quadrature
/// error). When tau > 0 the partition is coarsened so spacing >= tau.
struct WfCertificate {
  std::vector<double> partition;           // t_0 = 0 < t_1 < ... <= horizon
  double T = 0.0;                          // effective spacing bound: max_n (t_n - t_{n-1})
  double requested_T = 0.0;                // the T the certification was asked for
  double alpha_bar = 0.0;
  double tau = 0.0;
  std::vector<double> interval_integrals;  // quadrature values per interval
  double quadrature_error = 0.0;           // worst Richardson estimate seen
  bool tau_compatible = false;             // tau <= t_n - t_{n-1} <= T for all n
  bool coarsened = false;                  // intervals were merged to reach tau spacing

  std::size_t intervals() const { return partition.empty() ? 0 : partition.size() - 1; }
};

struct WfFailure {
  std::string reason;
  double window_start = 0.0;
  double window_end = 0.0;
  double achieved = 0.0;  // integral actually reached on the failing window
  double required = 0.0;
};

using WfResult = std::variant<WfCertificate, WfFailure>;

/// Greedy certification: t_n is the earliest t <= t_{n-1} + T whose integral
/// of alpha since t_{n-1} reaches alpha_bar (bisection to 1e-9 * T); when
/// tau > 0, consecutive intervals are merged until spacing >= tau. Fails with
/// the offending window when no partition exists on [0, horizon].
///
/// grid > 0 rounds each t_n up to the next multiple of grid (the
/// integration step), so downstream checks read exact node states. Extending
/// an interval only grows its integral, so the certificate stays valid; the
/// effective T absorbs the enlarged spacing.
WfResult certify_wf(const WeightSpec& spec, double T, double alpha_bar, double horizon,
                    double tau = 0.0, double grid = 0.0);

/// Composite Simpson integral of alpha over [a, b] with n subintervals
/// (n is rounded up to an even value).
double integrate_weight(const WeightSpec& spec, double a, double b, int n);

}  // namespace hklapse
