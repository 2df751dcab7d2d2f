#include "hklapse/trajectory.hpp"

#include "hklapse/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hklapse {

namespace {

double hermite_h00(double s) { return (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s); }
double hermite_h10(double s) { return s * (1.0 - s) * (1.0 - s); }
double hermite_h01(double s) { return s * s * (3.0 - 2.0 * s); }
double hermite_h11(double s) { return s * s * (s - 1.0); }

}  // namespace

Trajectory::Trajectory(double h, double tau, std::vector<Mat> states, std::vector<Mat> derivs,
                       Mat hist_deriv_zero, SimStats stats)
    : h_(h), tau_(tau), states_(std::move(states)), derivs_(std::move(derivs)),
      hist_deriv_zero_(std::move(hist_deriv_zero)), stats_(stats) {
  require(h_ > 0.0, "trajectory needs h > 0");
  require(tau_ >= 0.0, "trajectory needs tau >= 0");
  m_ = static_cast<int>(std::llround(tau_ / h_));
  require(std::abs(m_ * h_ - tau_) <= 1e-9 * std::max(1.0, tau_),
          "tau must be an integer multiple of h");
  require(states_.size() >= static_cast<std::size_t>(m_) + 2, "trajectory needs >= 2 nodes");
  require(states_.size() == derivs_.size(), "state/derivative cache size mismatch");
  const auto rows = states_.front().rows();
  const auto cols = states_.front().cols();
  require(cols >= 2 && rows >= 1, "trajectory needs N >= 2, d >= 1");
  for (std::size_t k = 0; k < states_.size(); ++k) {
    require(states_[k].rows() == rows && states_[k].cols() == cols &&
                derivs_[k].rows() == rows && derivs_[k].cols() == cols,
            "inconsistent state dimensions across nodes");
  }
  if (m_ > 0)
    require(hist_deriv_zero_.rows() == rows && hist_deriv_zero_.cols() == cols,
            "missing history derivative at t = 0");
  stats_.initial_diameter = diameter(states_[static_cast<std::size_t>(m_)]);
}

Trajectory Trajectory::from_callable(const std::function<Mat(double)>& x,
                                     const std::function<Mat(double)>& dx, double h, double tau,
                                     double t_end) {
  require(h > 0.0 && t_end > 0.0, "from_callable needs h > 0 and t_end > 0");
  const int m = static_cast<int>(std::llround(tau / h));
  require(std::abs(m * h - tau) <= 1e-9 * std::max(1.0, tau),
          "tau must be an integer multiple of h");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
  std::vector<Mat> xs, fs;
  xs.reserve(m + steps + 1);
  fs.reserve(m + steps + 1);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(m) + steps; ++k) {
    const double t = (static_cast<double>(k) - m) * h;
    xs.push_back(x(t));
    fs.push_back(dx(t));
  }
  Mat hist_dz = m > 0 ? dx(0.0) : Mat();
  return Trajectory(h, tau, std::move(xs), std::move(fs), std::move(hist_dz));
}

Mat Trajectory::eval(double t) const {
  const double tol = 1e-9 * h_;
  require(t >= t_begin() - tol && t <= t_end() + tol, "evaluation time outside trajectory");
  t = std::clamp(t, t_begin(), t_end());
  auto seg = static_cast<std::ptrdiff_t>(std::floor((t - t_begin()) / h_));
  seg = std::clamp<std::ptrdiff_t>(seg, 0, static_cast<std::ptrdiff_t>(nodes()) - 2);
  const double s = (t - time_at(static_cast<std::size_t>(seg))) / h_;
  const Mat& xa = states_[seg];
  const Mat& xb = states_[seg + 1];
  const Mat& fa = derivs_[seg];
  // the [-h, 0] segment interpolates the history, whose derivative at 0- is
  // not the forward RHS
  const Mat& fb = (m_ > 0 && seg + 1 == m_) ? hist_deriv_zero_ : derivs_[seg + 1];
  return hermite_h00(s) * xa + (hermite_h10(s) * h_) * fa + hermite_h01(s) * xb +
         (hermite_h11(s) * h_) * fb;
}

std::size_t Trajectory::node_after(double t) const {
  const auto k = static_cast<std::ptrdiff_t>(std::ceil((t - t_begin()) / h_ - 1e-9));
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(nodes()) - 1));
}

std::size_t Trajectory::node_before(double t) const {
  const auto k = static_cast<std::ptrdiff_t>(std::floor((t - t_begin()) / h_ + 1e-9));
  return static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(nodes()) - 1));
}

double window_diameter(const Trajectory& traj, double t_lo, double t_hi) {
  require(t_hi >= t_lo, "window bounds out of order");
  t_lo = std::max(t_lo, traj.t_begin());
  t_hi = std::min(t_hi, traj.t_end());
  const std::size_t k_lo = traj.node_after(t_lo);
  const std::size_t k_hi = traj.node_before(t_hi);
  const int n = traj.agents();
  const int d = traj.dim();

  std::size_t cols = (k_hi >= k_lo ? k_hi - k_lo + 1 : 0) * n;
  const bool lo_off_grid = k_lo > 0 && std::abs(traj.time_at(k_lo) - t_lo) > 1e-9 * traj.h();
  const bool hi_off_grid = std::abs(traj.time_at(k_hi) - t_hi) > 1e-9 * traj.h();
  cols += (lo_off_grid ? n : 0) + (hi_off_grid ? n : 0);

  Mat cloud(d, cols);
  Eigen::Index at = 0;
  if (lo_off_grid) {
    cloud.middleCols(at, n) = traj.eval(t_lo);
    at += n;
  }
  for (std::size_t k = k_lo; k <= k_hi && k_hi >= k_lo; ++k) {
    cloud.middleCols(at, n) = traj.state_at(k);
    at += n;
  }
  if (hi_off_grid) {
    cloud.middleCols(at, n) = traj.eval(t_hi);
    at += n;
  }
  return max_pairwise_distance(cloud.leftCols(at));
}

double window_diameter(const Trajectory& traj, std::size_t n, const WfCertificate& cert,
                       double tau) {
  require(n < cert.partition.size(), "partition index out of range");
  const double tn = cert.partition[n];
  require(tn <= traj.t_end() + 1e-9 * traj.h(), "window outside trajectory");
  return window_diameter(traj, tn - tau, tn);
}

std::vector<double> suffix_diameters(const Trajectory& traj, const std::vector<double>& anchors) {
  const int n = traj.agents();
  const int d = traj.dim();
  const std::size_t nodes = traj.nodes();
  const std::size_t total = nodes * static_cast<std::size_t>(n);

  // reference point: centroid of the final state (roughly the consensus
  // value); distances to it bound pairwise distances for the prune
  const Vec ref = traj.state_at(nodes - 1).rowwise().mean();

  Mat pts(d, total);
  std::vector<double> time_of(total), r(total);
  std::size_t at = 0;
  for (std::size_t k = 0; k < nodes; ++k) {
    const Mat& x = traj.state_at(k);
    const double t = traj.time_at(k);
    for (int i = 0; i < n; ++i, ++at) {
      pts.col(at) = x.col(i);
      time_of[at] = t;
      r[at] = (x.col(i) - ref).norm();
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] > r[b]; });

  std::vector<double> out;
  out.reserve(anchors.size());
  for (const double anchor : anchors) {
    const double cut = anchor - 1e-9 * traj.h();
    std::vector<std::size_t> live;
    live.reserve(total);
    for (const std::size_t p : order)
      if (time_of[p] >= cut) live.push_back(p);

    // exact diameter with the triangle-inequality prune: any pair beating
    // `best` satisfies r_a + r_b > best, and r is sorted descending
    double best2 = 0.0;
    for (std::size_t a = 0; a + 1 < live.size(); ++a) {
      const double ra = r[live[a]];
      double bound = 2.0 * ra;
      if (bound * bound <= best2) break;
      for (std::size_t b = a + 1; b < live.size(); ++b) {
        bound = ra + r[live[b]];
        if (bound * bound <= best2) break;
        best2 = std::max(best2, (pts.col(live[a]) - pts.col(live[b])).squaredNorm());
      }
    }
    out.push_back(std::sqrt(best2));
  }
  return out;
}

namespace {

void put17(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int decimation) {
  require(decimation >= 1, "decimation must be >= 1");
  os << "t";
  for (int i = 1; i <= traj.agents(); ++i)
    for (int j = 1; j <= traj.dim(); ++j) os << ",x_" << i << "_" << j;
  os << ",diameter\n";
  auto write_row = [&](std::size_t node) {
    put17(os, traj.time_at(node));
    const Mat& x = traj.state_at(node);
    for (int i = 0; i < traj.agents(); ++i)
      for (int j = 0; j < traj.dim(); ++j) {
        os << ',';
        put17(os, x(j, i));
      }
    os << ',';
    put17(os, diameter(x));
    os << '\n';
  };
  const std::size_t last = traj.nodes() - 1;
  std::size_t written_last = 0;
  for (std::size_t k = 0; k <= last; k += decimation) {
    write_row(k);
    written_last = k;
  }
  if (written_last != last) write_row(last);
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "empty trajectory CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  require(header.size() >= 4 && header.front() == "t" && header.back() == "diameter",
          "unrecognized trajectory CSV header");
  const std::size_t nd = header.size() - 2;
  int N = 0, d = 0;
  if (std::sscanf(header[header.size() - 2].c_str(), "x_%d_%d", &N, &d) != 2 || N < 2 || d < 1 ||
      static_cast<std::size_t>(N) * d != nd)
    throw std::invalid_argument("unrecognized trajectory CSV column names");

  std::vector<double> times;
  std::vector<Mat> states;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    require(row.size() == header.size(), "trajectory CSV row width mismatch");
    times.push_back(row[0]);
    Mat x(d, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < d; ++j) x(j, i) = row[1 + static_cast<std::size_t>(i) * d + j];
    states.push_back(std::move(x));
  }
  require(times.size() >= 3, "trajectory CSV needs >= 3 rows");
  const double h = times[1] - times[0];
  require(h > 0.0, "trajectory CSV times must increase");
  for (std::size_t k = 1; k < times.size(); ++k)
    require(std::abs(times[k] - times[k - 1] - h) <= 1e-6 * h,
            "trajectory CSV grid is not uniform");
  const double tau = times.front() < 0.0 ? -times.front() : 0.0;
  const int m = static_cast<int>(std::llround(tau / h));

  // finite-difference derivative cache; adequate for node-grid verification
  const std::size_t K = states.size();
  std::vector<Mat> derivs(K);
  auto fd = [&](std::size_t k) -> Mat {
    if (k >= 2 && k + 2 < K)
      return (states[k - 2] - 8.0 * states[k - 1] + 8.0 * states[k + 1] - states[k + 2]) /
             (12.0 * h);
    if (k == 0) return (states[1] - states[0]) / h;
    if (k + 1 == K) return (states[K - 1] - states[K - 2]) / h;
    return (states[k + 1] - states[k - 1]) / (2.0 * h);
  };
  for (std::size_t k = 0; k < K; ++k) derivs[k] = fd(k);
  Mat hist_dz;
  if (m > 0) {
    const auto mm = static_cast<std::size_t>(m);
    hist_dz = mm >= 2 ? Mat((3.0 * states[mm] - 4.0 * states[mm - 1] + states[mm - 2]) / (2.0 * h))
                      : Mat((states[mm] - states[mm - 1]) / h);
  }
  return Trajectory(h, tau, std::move(states), std::move(derivs), std::move(hist_dz));
}

}  // namespace hklapse
