#pragma once

#include "hklapse/common.hpp"
#include "hklapse/state.hpp"
#include "hklapse/wf.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace hklapse {

struct SimStats {
  std::size_t steps = 0;
  bool consensus_stopped = false;
  bool causality_ok = true;  // delayed reads never touched an unfinished node
  double initial_diameter = 0.0;
};

/// Dense-output record of a run on the uniform grid t_k = -tau + k*h.
/// Node m (= tau/h) is t = 0; nodes below it hold the history segment.
/// Between nodes the trajectory is the cubic Hermite interpolant through the
/// cached endpoint derivatives, which matches the integrator order. The
/// history segment carries its own derivatives, with a separate left-limit
/// derivative at t = 0 (the solution generally has a derivative kink there).
class Trajectory {
 public:
  Trajectory(double h, double tau, std::vector<Mat> states, std::vector<Mat> derivs,
             Mat hist_deriv_zero, SimStats stats = {});

  /// Synthetic trajectory sampled from closed-form x(t), dx(t) on the same
  /// grid layout; used by tests and adversarial checks.
  static Trajectory from_callable(const std::function<Mat(double)>& x,
                                  const std::function<Mat(double)>& dx, double h, double tau,
                                  double t_end);

  double h() const { return h_; }
  double tau() const { return tau_; }
  int delay_nodes() const { return m_; }
  std::size_t nodes() const { return states_.size(); }
  std::size_t forward_nodes() const { return states_.size() - static_cast<std::size_t>(m_); }
  double time_at(std::size_t k) const { return (static_cast<double>(k) - m_) * h_; }
  double t_begin() const { return -tau_; }
  double t_end() const { return time_at(nodes() - 1); }
  int agents() const { return static_cast<int>(states_.front().cols()); }
  int dim() const { return static_cast<int>(states_.front().rows()); }

  const Mat& state_at(std::size_t k) const { return states_[k]; }
  const Mat& deriv_at(std::size_t k) const { return derivs_[k]; }
  const SimStats& stats() const { return stats_; }

  /// Dense evaluation anywhere in [-tau, t_end].
  Mat eval(double t) const;

  /// First node with time >= t (clamped into range).
  std::size_t node_after(double t) const;
  /// Last node with time <= t (clamped into range).
  std::size_t node_before(double t) const;

 private:
  double h_ = 0.0, tau_ = 0.0;
  int m_ = 0;
  std::vector<Mat> states_, derivs_;
  Mat hist_deriv_zero_;  // left-limit derivative at t = 0 (tau > 0 only)
  SimStats stats_;
};

/// Largest distance between any two agents at any two grid times in
/// [t_lo, t_hi]; the window endpoints are included via dense output.
double window_diameter(const Trajectory& traj, double t_lo, double t_hi);

/// D_n over [t_n - tau, t_n] for partition index n of the certificate.
double window_diameter(const Trajectory& traj, std::size_t n, const WfCertificate& cert,
                       double tau);

/// For each anchor a: the largest distance between any two agents at any two
/// grid times >= a. Exact branch-and-bound over the node cloud.
std::vector<double> suffix_diameters(const Trajectory& traj, const std::vector<double>& anchors);

/// CSV export: t, x_1_1..x_1_d, ..., x_N_1..x_N_d, diameter; one row per
/// node, every `decimation`-th node (the final node is always written).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int decimation = 1);

/// Rebuild a trajectory from the CSV schema above. Derivatives are
/// reconstructed by finite differences (verification-grade dense output).
Trajectory read_trajectory_csv(std::istream& is);

}  // namespace hklapse
