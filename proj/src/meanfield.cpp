#include "hklapse/meanfield.hpp"

#include "hklapse/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

namespace hklapse {

namespace {

constexpr int kAtomCap = 512;
constexpr double kMassEps = 1e-15;

void check_measure(const EmpiricalMeasure& mu) {
  require(mu.points.cols() >= 1, "empty measure");
  require(mu.points.allFinite(), "measure has non-finite atoms");
  require(mu.weights.size() == mu.points.cols(), "weights/points size mismatch");
}

}  // namespace

EmpiricalMeasure make_measure(Mat points, Vec weights) {
  EmpiricalMeasure mu{std::move(points), std::move(weights)};
  check_measure(mu);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < mu.weights.size(); ++k) {
    require(std::isfinite(mu.weights[k]) && mu.weights[k] >= 0.0,
            "weights must be nonnegative");
    sum += mu.weights[k];
  }
  require(std::abs(sum - 1.0) <= 1e-12, "weights must sum to 1 within 1e-12");
  mu.weights /= sum;
  return mu;
}

EmpiricalMeasure make_measure(Mat points) {
  const auto n = points.cols();
  require(n >= 1, "empty measure");
  return make_measure(std::move(points), Vec::Constant(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure empirical(const OpinionState& state) {
  validate(state);
  return make_measure(state.x);
}

double support_diameter(const EmpiricalMeasure& mu) {
  check_measure(mu);
  return max_pairwise_distance(mu.points);
}

double wasserstein1_sorted1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu.dim() == 1 && nu.dim() == 1, "sorted coupling applies to d = 1");
  auto gather = [](const EmpiricalMeasure& m) {
    std::vector<std::pair<double, double>> atoms(static_cast<std::size_t>(m.size()));
    for (int k = 0; k < m.size(); ++k) atoms[k] = {m.points(0, k), m.weights[k]};
    std::sort(atoms.begin(), atoms.end());
    return atoms;
  };
  const auto a = gather(mu), b = gather(nu);
  std::size_t i = 0, j = 0;
  double ma = a[0].second, mb = b[0].second, cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double take = std::min(ma, mb);
    cost += take * std::abs(a[i].first - b[j].first);
    ma -= take;
    mb -= take;
    if (ma <= kMassEps) {
      if (++i < a.size()) ma = a[i].second;
    }
    if (mb <= kMassEps) {
      if (++j < b.size()) mb = b[j].second;
    }
  }
  return cost;
}

double assignment_cost(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  require(cost.cols() == n && n >= 1, "assignment needs a square cost matrix");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

namespace {

bool uniform_weights(const EmpiricalMeasure& mu) {
  const double w = 1.0 / mu.size();
  for (int k = 0; k < mu.size(); ++k)
    if (std::abs(mu.weights[k] - w) > 1e-12) return false;
  return true;
}

Mat cross_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  Mat c(mu.size(), nu.size());
  for (int i = 0; i < mu.size(); ++i)
    for (int j = 0; j < nu.size(); ++j) c(i, j) = (mu.points.col(i) - nu.points.col(j)).norm();
  return c;
}

}  // namespace

double wasserstein1_assignment(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu.size() == nu.size(), "assignment route needs equal-size supports");
  require(uniform_weights(mu) && uniform_weights(nu),
          "assignment route needs uniform weights");
  return assignment_cost(cross_cost(mu, nu)) / static_cast<double>(mu.size());
}

// Exact optimum over the coupling polytope, as the transportation special
// case: successive shortest augmenting paths with node potentials.
double wasserstein1_flow(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const int m = mu.size(), n = nu.size();
  const Mat c = cross_cost(mu, nu);
  Vec rem_a = mu.weights, rem_b = nu.weights;
  Mat flow = Mat::Zero(m, n);
  std::vector<double> pot(m + n, 0.0);

  constexpr double inf = std::numeric_limits<double>::infinity();
  const int V = m + n;
  std::vector<double> dist(V);
  std::vector<int> prev(V);
  std::vector<char> done(V);

  // leftover mass below 1e-13 is FP normalization noise, not transport
  int guard = 4 * (m + n) + 16;
  while (rem_a.maxCoeff() > 1e-13) {
    if (--guard < 0) throw std::runtime_error("transportation solve failed to converge");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int i = 0; i < m; ++i)
      if (rem_a[i] > kMassEps) dist[i] = 0.0;

    for (int it = 0; it < V; ++it) {
      int u = -1;
      double best = inf;
      for (int v = 0; v < V; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      if (u < 0) break;
      done[u] = 1;
      if (u < m) {
        for (int j = 0; j < n; ++j) {
          const double rc = std::max(0.0, c(u, j) + pot[u] - pot[m + j]);
          if (dist[u] + rc < dist[m + j]) {
            dist[m + j] = dist[u] + rc;
            prev[m + j] = u;
          }
        }
      } else {
        const int j = u - m;
        for (int i = 0; i < m; ++i) {
          if (flow(i, j) <= kMassEps) continue;
          const double rc = std::max(0.0, -c(i, j) + pot[m + j] - pot[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = u;
          }
        }
      }
    }

    int sink = -1;
    double best = inf;
    for (int j = 0; j < n; ++j)
      if (rem_b[j] > kMassEps && dist[m + j] < best) {
        best = dist[m + j];
        sink = j;
      }
    if (sink < 0) throw std::runtime_error("transportation solve: no augmenting path");

    for (int v = 0; v < V; ++v)
      if (dist[v] < inf) pot[v] += std::min(dist[v], best);

    // bottleneck: residual capacity only binds on backward (sink -> source)
    // arcs and at the endpoints
    double delta = rem_b[sink];
    for (int v = m + sink; prev[v] >= 0; v = prev[v])
      if (v < m) delta = std::min(delta, flow(v, prev[v] - m));
    {
      int v = m + sink;
      while (prev[v] >= 0) v = prev[v];
      delta = std::min(delta, rem_a[v]);
    }

    for (int v = m + sink; prev[v] >= 0; v = prev[v]) {
      const int w = prev[v];
      if (w < m)
        flow(w, v - m) += delta;  // source -> sink forward arc
      else
        flow(v, w - m) -= delta;  // sink -> source backward arc
    }
    {
      int v = m + sink;
      while (prev[v] >= 0) v = prev[v];
      rem_a[v] -= delta;
    }
    rem_b[sink] -= delta;
  }

  double total = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) total += flow(i, j) * c(i, j);
  return total;
}

double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_measure(mu);
  check_measure(nu);
  require(mu.dim() == nu.dim(), "measures live in different dimensions");
  require(mu.size() <= kAtomCap && nu.size() <= kAtomCap,
          "supports exceed the 512-atom cap");
  if (mu.dim() == 1) return wasserstein1_sorted1d(mu, nu);
  if (mu.size() == nu.size() && uniform_weights(mu) && uniform_weights(nu))
    return wasserstein1_assignment(mu, nu);
  return wasserstein1_flow(mu, nu);
}

namespace {

Mat sample_box(Rng& rng, const Vec& lo, const Vec& hi, int dim, int n) {
  Mat x(dim, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) x(k, i) = rng.uniform(lo[k], hi[k]);
  return x;
}

struct InstanceResult {
  Trajectory traj;
  StudyInstance summary;
};

}  // namespace

StudyReport meanfield_decay_study(const StudySpec& spec) {
  require(!spec.N_list.empty(), "study needs a nonempty N list");
  for (const int n : spec.N_list) require(n >= 2, "study needs N >= 2");
  require(spec.dim >= 1, "study needs d >= 1");
  require(spec.box_low.size() == spec.dim && spec.box_high.size() == spec.dim,
          "box bounds must match the dimension");
  for (int k = 0; k < spec.dim; ++k)
    require(spec.box_low[k] <= spec.box_high[k], "box bounds out of order");
  require(spec.tau >= 0.0, "study needs tau >= 0");
  if (spec.influence.family() != InfluenceFamily::constant &&
      spec.influence.family() != InfluenceFamily::radial_power)
    throw std::invalid_argument(
        "mean-field studies admit constant and radial_power influences only "
        "(closed-form Lipschitz constant required)");

  // budget: sum over N of N * steps, at the step the runs will actually use
  {
    const double h_eff = effective_step(spec.tau, spec.sim.h);
    double work = 0.0;
    for (const int n : spec.N_list) work += static_cast<double>(n) * (spec.sim.t_end / h_eff);
    require(work <= spec.budget, "study budget exceeded (N * horizon cap)");
  }

  const double horizon =
      std::max(spec.horizon, spec.sim.t_end + std::max(spec.T, spec.tau) + spec.T);
  const WfResult wf = certify_wf(spec.weight, spec.T, spec.alpha_bar, horizon, spec.tau);
  if (std::holds_alternative<WfFailure>(wf))
    throw std::invalid_argument("study weight cannot be (WF)-certified: " +
                                std::get<WfFailure>(wf).reason);
  const WfCertificate cert = std::get<WfCertificate>(wf);

  StudyReport report;
  report.lipschitz_L = spec.influence.lipschitz();

  auto run_instance = [&](int N) -> InstanceResult {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(N)));
    const Mat x0 = sample_box(rng, spec.box_low, spec.box_high, spec.dim, N);
    Trajectory traj = spec.tau > 0.0
                          ? simulate(HistorySpec::Constant(x0), spec.influence, spec.weight,
                                     spec.tau, spec.sim)
                          : simulate_undelayed(x0, spec.influence, spec.weight, spec.sim);

    const auto m = static_cast<std::size_t>(traj.delay_nodes());
    double M0 = 0.0, max_hist = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      M0 = std::max(M0, compute_M0(traj.state_at(k)));
      max_hist = std::max(max_hist, diameter(traj.state_at(k)));
    }
    const Psi0 psi0 = compute_psi0(spec.influence, M0, spec.dim);
    const BoundSet bounds =
        spec.tau > 0.0
            ? constants_delayed(spec.influence.k_sup(), cert.T, spec.tau, psi0.value,
                                spec.alpha_bar)
            : constants_undelayed(spec.influence.k_sup(), cert.T, psi0.value, spec.alpha_bar);

    StudyInstance inst;
    inst.N = N;
    inst.gamma_env = bounds.gamma;
    inst.offset = spec.tau > 0.0 ? 3.0 * cert.T - spec.tau : cert.T;
    inst.max_history_dX = max_hist;
    inst.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = m; k < traj.nodes(); ++k) {
      const double env =
          max_hist * std::exp(-inst.gamma_env * (traj.time_at(k) - inst.offset));
      inst.worst_margin = std::min(inst.worst_margin, env - diameter(traj.state_at(k)));
    }
    inst.envelope_pass = inst.worst_margin >= -spec.envelope_tol;
    inst.final_dX = diameter(traj.state_at(traj.nodes() - 1));
    return {std::move(traj), inst};
  };

  std::vector<std::future<InstanceResult>> futures;
  futures.reserve(spec.N_list.size());
  for (const int N : spec.N_list)
    futures.push_back(std::async(std::launch::async, run_instance, N));
  std::vector<InstanceResult> results;
  results.reserve(futures.size());
  for (auto& f : futures) results.push_back(f.get());

  // shared comparison grid for the Wasserstein trend
  const int w1_times = std::max(2, spec.w1_times);
  double t_common = results.front().traj.t_end();
  for (const auto& r : results) t_common = std::min(t_common, r.traj.t_end());

  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    const Trajectory& traj = results[idx].traj;
    const StudyInstance& inst = results[idx].summary;
    report.instances.push_back(inst);
    const std::size_t row0 = report.rows.size();
    const auto m = static_cast<std::size_t>(traj.delay_nodes());
    for (std::size_t k = m; k < traj.nodes(); ++k) {
      const double t = traj.time_at(k);
      report.rows.push_back(
          {inst.N, t, diameter(traj.state_at(k)),
           inst.max_history_dX * std::exp(-inst.gamma_env * (t - inst.offset))});
    }
    if (idx + 1 < results.size()) {
      const Trajectory& next = results[idx + 1].traj;
      for (int j = 0; j < w1_times; ++j) {
        const double t = t_common * j / (w1_times - 1);
        const double w1 =
            wasserstein1(make_measure(traj.eval(t)), make_measure(next.eval(t)));
        const auto node = traj.node_before(t);
        report.rows[row0 + (node - m)].w1_next = w1;
      }
    }
  }

  report.pass = std::all_of(report.instances.begin(), report.instances.end(),
                            [](const StudyInstance& i) { return i.envelope_pass; });
  return report;
}

}  // namespace hklapse
