#pragma once

#include "hklapse/theory.hpp"
#include "hklapse/trajectory.hpp"
#include "hklapse/wf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hklapse {

/// One certified inequality. Every check is expressed as (rhs - lhs), so
/// pass <=> worst_margin >= -tol.
struct CheckRecord {
  std::string name;
  std::string statement;
  double worst_margin = 0.0;
  double location = 0.0;  // time (or partition time) of the worst margin
  double tol = 0.0;
  bool pass = false;
};

struct HullOptions {
  int directions = 20;
  std::uint64_t seed = 0x68756c6c;  // recorded in the report
  int anchors = 8;
};

struct VerificationReport {
  Regime regime = Regime::undelayed;
  std::vector<CheckRecord> checks;
  std::string tolerance_policy;
  HullOptions hull;
  bool pass = false;

  const CheckRecord* find(const std::string& name) const;
};

/// d(t_n) and D_n along the certified partition (restricted to the
/// trajectory horizon). D is filled for the delayed regime only.
struct PartitionSeries {
  std::vector<double> t;
  std::vector<double> d_at;
  std::vector<double> D;
};

PartitionSeries partition_series(const Trajectory& traj, const WfCertificate& cert,
                                 Regime regime);

/// d(t_k) <= bound_curve(t_k) at every node t_k >= 0.
CheckRecord check_decay_bound(const Trajectory& traj, const BoundSet& bounds,
                              const WfCertificate& cert);

/// Per-interval contraction along the partition, the delayed three-window
/// contraction, and the monotone-diameter remark.
std::vector<CheckRecord> check_interval_contraction(const Trajectory& traj,
                                                    const WfCertificate& cert,
                                                    const BoundSet& bounds);

/// D_{n+1} <= e^{-K T} d(t_n) + (1 - e^{-K T}) D_n (delayed regime).
CheckRecord check_window_recursion(const Trajectory& traj, const WfCertificate& cert,
                                   const BoundSet& bounds);

/// (a) projection confinement to the [S - tau, S] window envelope for
/// t >= S along fixed random directions, (b) |x_i(t)| <= M0, and (c) the
/// suffix bound |x_i(s) - x_j(t)| <= D_n for s, t >= t_n - tau.
std::vector<CheckRecord> check_hull_and_bounds(const Trajectory& traj, const BoundSet& bounds,
                                               const WfCertificate& cert,
                                               const HullOptions& opt = {});

/// All checks for the given regime, computed once off a shared partition
/// series. Deterministic: identical inputs give bit-identical reports.
VerificationReport verify_trajectory(const Trajectory& traj, const BoundSet& bounds,
                                     const WfCertificate& cert, const HullOptions& opt = {});

}  // namespace hklapse
