#include "hklapse/verify.hpp"

#include "hklapse/pairwise.hpp"

#include <algorithm>
#include <cmath>

namespace hklapse {

namespace {

double tol_for(double scale) { return 1e-8 * (1.0 + scale); }

struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  double location = 0.0;
  void offer(double m, double loc) {
    if (m < margin) {
      margin = m;
      location = loc;
    }
  }
};

CheckRecord make_record(std::string name, std::string statement, const Worst& w, double tol) {
  CheckRecord r;
  r.name = std::move(name);
  r.statement = std::move(statement);
  r.worst_margin = w.margin;
  r.location = w.location;
  r.tol = tol;
  r.pass = w.margin >= -tol;
  return r;
}

void check_regime(const Trajectory& traj, const BoundSet& bounds) {
  if (bounds.regime == Regime::undelayed)
    require(traj.tau() == 0.0, "undelayed bounds applied to a delayed trajectory");
  else
    require(std::abs(bounds.tau - traj.tau()) <= 1e-9 * std::max(1.0, bounds.tau),
            "bound set tau does not match the trajectory");
}

CheckRecord decay_bound_impl(const Trajectory& traj, const BoundSet& bounds) {
  Worst w;
  const auto m = static_cast<std::size_t>(traj.delay_nodes());
  for (std::size_t k = m; k < traj.nodes(); ++k) {
    const double t = traj.time_at(k);
    w.offer(bound_curve(bounds, std::max(t, 0.0)) - diameter(traj.state_at(k)), t);
  }
  const char* stmt = bounds.regime == Regime::undelayed
                         ? "d(t) <= d(0) * exp(-gamma * (t - T))"
                         : "d(t) <= D_0 * exp(-gamma_tilde * (t - 3*T + tau))";
  return make_record("decay_bound", stmt, w, tol_for(bounds.d0));
}

std::vector<CheckRecord> interval_contraction_impl(const PartitionSeries& s,
                                                   const BoundSet& bounds) {
  std::vector<CheckRecord> out;
  const double tol = tol_for(bounds.d0);
  if (bounds.regime == Regime::undelayed) {
    require(s.t.size() >= 2, "need at least 2 partition points within the horizon");
    Worst contraction, monotone;
    for (std::size_t n = 1; n < s.t.size(); ++n) {
      contraction.offer(bounds.C * s.d_at[n - 1] - s.d_at[n], s.t[n]);
      monotone.offer(s.d_at[n - 1] - s.d_at[n], s.t[n]);
    }
    out.push_back(
        make_record("interval_contraction", "d(t_n) <= C * d(t_{n-1})", contraction, tol));
    out.push_back(make_record("monotone_diameters", "d(t_{n+1}) <= d(t_n)", monotone, tol));
  } else {
    require(s.t.size() >= 3, "need at least 3 partition points within the horizon");
    Worst contraction, window, monotone;
    for (std::size_t n = 2; n < s.t.size(); ++n)
      contraction.offer(bounds.C * s.D[n - 2] - s.d_at[n], s.t[n]);
    bool any_window = false;
    for (std::size_t n = 2; n + 1 < s.t.size(); ++n) {
      window.offer(*bounds.C_tilde * s.D[n - 2] - s.D[n + 1], s.t[n + 1]);
      any_window = true;
    }
    for (std::size_t n = 0; n + 1 < s.t.size(); ++n)
      monotone.offer(s.D[n] - s.D[n + 1], s.t[n + 1]);
    out.push_back(make_record("interval_contraction", "d(t_n) <= C * D_{n-2}", contraction, tol));
    if (any_window)
      out.push_back(
          make_record("window_contraction", "D_{n+1} <= C_tilde * D_{n-2}", window, tol));
    out.push_back(make_record("monotone_diameters", "D_{n+1} <= D_n", monotone, tol));
  }
  return out;
}

CheckRecord window_recursion_impl(const PartitionSeries& s, const BoundSet& bounds) {
  require(s.t.size() >= 2, "need at least 2 partition points within the horizon");
  const double ekt = std::exp(-bounds.K * bounds.T);
  Worst w;
  for (std::size_t n = 0; n + 1 < s.t.size(); ++n)
    w.offer(ekt * s.d_at[n] + (1.0 - ekt) * s.D[n] - s.D[n + 1], s.t[n + 1]);
  return make_record("window_recursion",
                     "D_{n+1} <= exp(-K*T) * d(t_n) + (1 - exp(-K*T)) * D_n", w,
                     tol_for(bounds.d0));
}

std::vector<CheckRecord> hull_and_bounds_impl(const Trajectory& traj, const BoundSet& bounds,
                                              const PartitionSeries& series,
                                              const HullOptions& opt) {
  std::vector<CheckRecord> out;
  const auto nodes = traj.nodes();
  const auto m = static_cast<std::size_t>(traj.delay_nodes());
  const int dirs = std::max(1, opt.directions);

  // (a) projection confinement along fixed random directions
  {
    Rng rng(opt.seed);
    Mat V(traj.dim(), dirs);
    for (int j = 0; j < dirs; ++j) V.col(j) = rng.unit_vector(traj.dim());

    Mat maxP(dirs, nodes), minP(dirs, nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      const Mat proj = V.transpose() * traj.state_at(k);  // dirs x N
      maxP.col(k) = proj.rowwise().maxCoeff();
      minP.col(k) = proj.rowwise().minCoeff();
    }
    Mat sufMax = maxP, sufMin = minP;
    for (std::size_t k = nodes - 1; k-- > 0;) {
      sufMax.col(k) = sufMax.col(k).cwiseMax(sufMax.col(k + 1));
      sufMin.col(k) = sufMin.col(k).cwiseMin(sufMin.col(k + 1));
    }

    const int n_anchors = std::max(1, opt.anchors);
    Worst w;
    for (int j = 0; j < n_anchors; ++j) {
      const std::size_t a =
          m + (nodes - 1 - m) * static_cast<std::size_t>(j) / static_cast<std::size_t>(n_anchors);
      const std::size_t w_lo = a >= m ? a - m : 0;  // window [S - tau, S]
      for (int v = 0; v < dirs; ++v) {
        double wmax = -std::numeric_limits<double>::infinity();
        double wmin = std::numeric_limits<double>::infinity();
        for (std::size_t k = w_lo; k <= a; ++k) {
          wmax = std::max(wmax, maxP(v, k));
          wmin = std::min(wmin, minP(v, k));
        }
        w.offer(wmax - sufMax(v, a), traj.time_at(a));
        w.offer(sufMin(v, a) - wmin, traj.time_at(a));
      }
    }
    out.push_back(make_record(
        "hull_confinement",
        "projections stay within the [S - tau, S] window envelope for all t >= S", w,
        tol_for(bounds.M0)));
  }

  // (b) uniform norm bound
  {
    Worst w;
    for (std::size_t k = 0; k < nodes; ++k)
      w.offer(bounds.M0 - traj.state_at(k).colwise().norm().maxCoeff(), traj.time_at(k));
    out.push_back(
        make_record("uniform_bound", "|x_i(t)| <= M0 for all t >= -tau", w, tol_for(bounds.M0)));
  }

  // (c) suffix diameters against the window diameters
  {
    std::vector<double> anchors;
    anchors.reserve(series.t.size());
    for (const double tn : series.t) anchors.push_back(tn - traj.tau());
    const std::vector<double> suffix = suffix_diameters(traj, anchors);
    Worst w;
    const bool delayed = bounds.regime == Regime::delayed;
    for (std::size_t n = 0; n < anchors.size(); ++n)
      w.offer((delayed ? series.D[n] : series.d_at[n]) - suffix[n], series.t[n]);
    out.push_back(make_record("suffix_diameter",
                              delayed ? "|x_i(s) - x_j(t)| <= D_n for all s, t >= t_n - tau"
                                      : "|x_i(s) - x_j(t)| <= d(t_n) for all s, t >= t_n",
                              w, tol_for(bounds.d0)));
  }
  return out;
}

}  // namespace

const CheckRecord* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

PartitionSeries partition_series(const Trajectory& traj, const WfCertificate& cert,
                                 Regime regime) {
  require(!cert.partition.empty() && cert.partition.front() == 0.0,
          "certificate partition must start at t_0 = 0");
  PartitionSeries s;
  const double t_max = traj.t_end() + 1e-9 * traj.h();
  for (const double tn : cert.partition) {
    if (tn > t_max) break;
    s.t.push_back(tn);
    s.d_at.push_back(diameter(traj.eval(tn)));
    if (regime == Regime::delayed) s.D.push_back(window_diameter(traj, tn - traj.tau(), tn));
  }
  return s;
}

CheckRecord check_decay_bound(const Trajectory& traj, const BoundSet& bounds,
                              const WfCertificate& cert) {
  check_regime(traj, bounds);
  require(cert.partition.size() >= 2 && cert.partition[1] <= traj.t_end() + 1e-9 * traj.h(),
          "horizon shorter than one partition interval");
  return decay_bound_impl(traj, bounds);
}

std::vector<CheckRecord> check_interval_contraction(const Trajectory& traj,
                                                    const WfCertificate& cert,
                                                    const BoundSet& bounds) {
  check_regime(traj, bounds);
  return interval_contraction_impl(partition_series(traj, cert, bounds.regime), bounds);
}

CheckRecord check_window_recursion(const Trajectory& traj, const WfCertificate& cert,
                                   const BoundSet& bounds) {
  check_regime(traj, bounds);
  require(bounds.regime == Regime::delayed, "window recursion applies to the delayed regime");
  return window_recursion_impl(partition_series(traj, cert, bounds.regime), bounds);
}

std::vector<CheckRecord> check_hull_and_bounds(const Trajectory& traj, const BoundSet& bounds,
                                               const WfCertificate& cert,
                                               const HullOptions& opt) {
  check_regime(traj, bounds);
  return hull_and_bounds_impl(traj, bounds, partition_series(traj, cert, bounds.regime), opt);
}

VerificationReport verify_trajectory(const Trajectory& traj, const BoundSet& bounds,
                                     const WfCertificate& cert, const HullOptions& opt) {
  check_regime(traj, bounds);
  const PartitionSeries series = partition_series(traj, cert, bounds.regime);

  VerificationReport report;
  report.regime = bounds.regime;
  report.hull = opt;
  report.tolerance_policy = "pass <=> worst_margin >= -1e-8 * (1 + scale)";

  require(series.t.size() >= 2 && !cert.partition.empty(),
          "horizon shorter than one partition interval");
  report.checks.push_back(decay_bound_impl(traj, bounds));
  for (auto& c : interval_contraction_impl(series, bounds)) report.checks.push_back(std::move(c));
  if (bounds.regime == Regime::delayed)
    report.checks.push_back(window_recursion_impl(series, bounds));
  for (auto& c : hull_and_bounds_impl(traj, bounds, series, opt))
    report.checks.push_back(std::move(c));

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const CheckRecord& c) { return c.pass; });
  return report;
}

}  // namespace hklapse
