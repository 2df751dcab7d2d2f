#include "hklapse/integrator.hpp"

#include <cmath>

namespace hklapse {

namespace {

// Influence evaluation without per-pair temporaries for radial families.
template <typename A, typename B>
double pair_influence(const InfluenceSpec& psi, const Eigen::MatrixBase<A>& y,
                      const Eigen::MatrixBase<B>& z) {
  if (psi.radial()) return psi.radial_profile((y - z).norm());
  return psi(Vec(y), Vec(z));
}

void rhs_undelayed_into(double t, const Mat& x, const InfluenceSpec& psi, const WeightSpec& alpha,
                        Mat& out) {
  const Eigen::Index n = x.cols();
  out.setZero();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = pair_influence(psi, x.col(i), x.col(j));
      out.col(i) += w * (x.col(j) - x.col(i));
    }
  out *= alpha(t) / static_cast<double>(n - 1);
}

void rhs_delayed_into(double t, const Mat& cur, const Mat& del, const InfluenceSpec& psi,
                      const WeightSpec& alpha, Mat& out) {
  const Eigen::Index n = cur.cols();
  out.setZero();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = pair_influence(psi, cur.col(i), del.col(j));
      out.col(i) += w * (del.col(j) - cur.col(i));
    }
  out *= alpha(t) / static_cast<double>(n - 1);
}

void check_finite(const Mat& x, std::size_t node, double t) {
  if (!x.allFinite())
    throw std::runtime_error("non-finite state at node " + std::to_string(node) + " (t = " +
                             std::to_string(t) + ")");
}

constexpr std::size_t kMaxSteps = 20000000;

}  // namespace

Mat rhs_undelayed(double t, const Mat& x, const InfluenceSpec& psi, const WeightSpec& alpha) {
  require(x.cols() >= 2, "need N >= 2 agents");
  require(x.allFinite(), "non-finite state");
  Mat out(x.rows(), x.cols());
  rhs_undelayed_into(t, x, psi, alpha, out);
  if (!out.allFinite()) throw std::runtime_error("non-finite velocity");
  return out;
}

Mat rhs_undelayed(const OpinionState& state, const InfluenceSpec& psi, const WeightSpec& alpha) {
  validate(state);
  return rhs_undelayed(state.t, state.x, psi, alpha);
}

Mat rhs_delayed(double t, const Mat& current, const Mat& delayed, const InfluenceSpec& psi,
                const WeightSpec& alpha) {
  require(current.cols() >= 2 && current.rows() == delayed.rows() &&
              current.cols() == delayed.cols(),
          "current/delayed state shape mismatch");
  require(current.allFinite() && delayed.allFinite(), "non-finite state");
  Mat out(current.rows(), current.cols());
  rhs_delayed_into(t, current, delayed, psi, alpha, out);
  if (!out.allFinite()) throw std::runtime_error("non-finite velocity");
  return out;
}

Trajectory simulate_undelayed(const Mat& x0, const InfluenceSpec& psi, const WeightSpec& alpha,
                              const SimOptions& opt) {
  validate(OpinionState{0.0, x0});
  require(opt.h > 0.0 && std::isfinite(opt.h), "need h > 0");
  require(opt.t_end > 0.0 && std::isfinite(opt.t_end), "need t_end > 0");
  const double h = opt.h;
  const auto steps = static_cast<std::size_t>(std::ceil(opt.t_end / h - 1e-9));
  require(steps >= 1 && steps <= kMaxSteps, "step count out of budget");

  const double d0 = diameter(x0);
  const double floor = 1e-12 * std::max(1.0, d0);

  std::vector<Mat> xs, fs;
  xs.reserve(steps + 1);
  fs.reserve(steps + 1);
  xs.push_back(x0);
  fs.push_back(rhs_undelayed(0.0, x0, psi, alpha));

  Mat k2(x0.rows(), x0.cols()), k3(x0.rows(), x0.cols()), k4(x0.rows(), x0.cols());
  Mat xt(x0.rows(), x0.cols());
  SimStats stats;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Mat& x = xs.back();
    const Mat& k1 = fs.back();
    xt = x + (0.5 * h) * k1;
    rhs_undelayed_into(t + 0.5 * h, xt, psi, alpha, k2);
    xt = x + (0.5 * h) * k2;
    rhs_undelayed_into(t + 0.5 * h, xt, psi, alpha, k3);
    xt = x + h * k3;
    rhs_undelayed_into(t + h, xt, psi, alpha, k4);
    Mat x1 = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(x1, k + 1, t + h);
    fs.push_back(rhs_undelayed(t + h, x1, psi, alpha));
    xs.push_back(std::move(x1));
    ++stats.steps;
    if (opt.stop_at_consensus && diameter(xs.back()) < floor) {
      stats.consensus_stopped = true;
      break;
    }
  }
  return Trajectory(h, 0.0, std::move(xs), std::move(fs), Mat(), stats);
}

namespace {

Trajectory simulate_delayed(const HistorySpec& history, const InfluenceSpec& psi,
                            const WeightSpec& alpha, double tau, const SimOptions& opt) {
  require(!history.is_point(), "delayed run needs a history defined on [-tau, 0]");
  const double h = effective_step(tau, opt.h);  // divides tau exactly
  const int m = static_cast<int>(std::llround(tau / h));
  const auto steps = static_cast<std::size_t>(std::ceil(opt.t_end / h - 1e-9));
  require(steps >= 1 && steps + m <= kMaxSteps, "step count out of budget");

  std::vector<Mat> xs, fs;
  xs.reserve(m + steps + 1);
  fs.reserve(m + steps + 1);
  for (int k = 0; k <= m; ++k) {
    const double t = std::clamp((static_cast<double>(k) - m) * h, -tau, 0.0);
    xs.push_back(history.at(t));
    validate(OpinionState{t, xs.back()});
    if (k < m) fs.push_back(history.derivative_at(t, tau));
  }
  const Mat hist_dz = history.derivative_at(0.0, tau);
  fs.push_back(rhs_delayed(0.0, xs[m], xs[0], psi, alpha));

  const Eigen::Index rows = xs[0].rows(), cols = xs[0].cols();
  const double d0 = diameter(xs[static_cast<std::size_t>(m)]);
  const double floor = 1e-12 * std::max(1.0, d0);

  // midpoint of a finished segment via cubic Hermite; the only off-node
  // delayed reads the aligned grid ever needs
  auto segment_mid = [&](std::size_t s) -> Mat {
    const Mat& fb = (s + 1 == static_cast<std::size_t>(m)) ? hist_dz : fs[s + 1];
    return 0.5 * (xs[s] + xs[s + 1]) + (h / 8.0) * (fs[s] - fb);
  };

  Mat k2(rows, cols), k3(rows, cols), k4(rows, cols), xt(rows, cols);
  SimStats stats;
  for (std::size_t k = m; k < static_cast<std::size_t>(m) + steps; ++k) {
    const double t = (static_cast<double>(k) - m) * h;
    const std::size_t s = k - static_cast<std::size_t>(m);  // delayed segment [s, s+1]
    stats.causality_ok = stats.causality_ok && (s + 1 <= k);
    const Mat& x = xs.back();
    const Mat& k1 = fs.back();
    const Mat mid = segment_mid(s);
    xt = x + (0.5 * h) * k1;
    rhs_delayed_into(t + 0.5 * h, xt, mid, psi, alpha, k2);
    xt = x + (0.5 * h) * k2;
    rhs_delayed_into(t + 0.5 * h, xt, mid, psi, alpha, k3);
    xt = x + h * k3;
    rhs_delayed_into(t + h, xt, xs[s + 1], psi, alpha, k4);
    Mat x1 = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(x1, k + 1, t + h);
    fs.push_back(rhs_delayed(t + h, x1, xs[s + 1], psi, alpha));
    xs.push_back(std::move(x1));
    ++stats.steps;
    if (opt.stop_at_consensus && diameter(xs.back()) < floor) {
      stats.consensus_stopped = true;
      break;
    }
  }
  return Trajectory(h, tau, std::move(xs), std::move(fs), hist_dz, stats);
}

}  // namespace

double effective_step(double tau, double h_target) {
  require(std::isfinite(h_target) && h_target > 0.0, "need h > 0");
  require(std::isfinite(tau) && tau >= 0.0, "need tau >= 0");
  if (tau <= 0.0) return h_target;
  const int m = std::max<int>(1, static_cast<int>(std::ceil(tau / h_target - 1e-9)));
  return tau / m;
}

Trajectory simulate(const HistorySpec& history, const InfluenceSpec& psi, const WeightSpec& alpha,
                    double tau, const SimOptions& opt) {
  require(std::isfinite(tau) && tau >= 0.0, "need tau >= 0");
  if (tau == 0.0) return simulate_undelayed(history.at(0.0), psi, alpha, opt);
  return simulate_delayed(history, psi, alpha, tau, opt);
}

}  // namespace hklapse
