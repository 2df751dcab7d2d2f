#include "hklapse/runner.hpp"

#include "hklapse/meanfield.hpp"
#include "hklapse/version.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace hklapse {

namespace fs = std::filesystem;

namespace {

void put17(std::ostream& os, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  os.write(buf, n);
}

void write_file(const fs::path& path, const std::string& payload) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << payload;
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Json cert_to_json(const WfCertificate& cert) {
  return Json{{"partition", cert.partition},
              {"T", cert.T},
              {"requested_T", cert.requested_T},
              {"alpha_bar", cert.alpha_bar},
              {"tau", cert.tau},
              {"interval_integrals", cert.interval_integrals},
              {"quadrature_error", cert.quadrature_error},
              {"tau_compatible", cert.tau_compatible},
              {"coarsened", cert.coarsened}};
}

Json failure_to_json(const WfFailure& f) {
  return Json{{"reason", f.reason},
              {"window_start", f.window_start},
              {"window_end", f.window_end},
              {"achieved", f.achieved},
              {"required", f.required}};
}

Json bounds_to_json(const BoundSet& b, bool psi0_sampled) {
  Json j{{"regime", b.regime == Regime::undelayed ? "undelayed" : "delayed"},
         {"K", b.K},
         {"M0", b.M0},
         {"psi0", b.psi0},
         {"psi0_sampled", psi0_sampled},
         {"T", b.T},
         {"alpha_bar", b.alpha_bar},
         {"tau", b.tau},
         {"C", b.C},
         {"gamma", b.gamma},
         {"d0", b.d0}};
  if (b.C_tilde) j["C_tilde"] = *b.C_tilde;
  return j;
}

Json checks_to_json(const VerificationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"statement", c.statement},
                          {"pass", c.pass},
                          {"worst_margin", c.worst_margin},
                          {"location", c.location},
                          {"tol", c.tol}});
  return Json{{"regime", r.regime == Regime::undelayed ? "undelayed" : "delayed"},
              {"tolerance_policy", r.tolerance_policy},
              {"hull", Json{{"directions", r.hull.directions},
                            {"seed", r.hull.seed},
                            {"anchors", r.hull.anchors}}},
              {"checks", std::move(checks)},
              {"pass", r.pass}};
}

void print_report(const VerificationReport& r) {
  for (const auto& c : r.checks) {
    std::printf("  [%s] %-22s worst_margin=% .3e at t=%- .6g (tol %.3e)\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.worst_margin, c.location, c.tol);
  }
}

void write_manifest(const fs::path& out_dir, const RunConfig& cfg,
                    const std::vector<std::string>& outputs) {
  Json m{{"tool", kToolName},
         {"version", kToolVersion},
         {"mode", mode_name(cfg.mode)},
         {"config", materialize(cfg)},
         {"outputs", outputs}};
  write_file(out_dir / cfg.out_manifest, m.dump(2) + "\n");
}

std::string trajectory_csv(const Trajectory& traj, int decimation) {
  std::ostringstream os;
  write_trajectory_csv(os, traj, decimation);
  return os.str();
}

std::string bounds_csv(const Trajectory& traj, const BoundSet& bounds, int decimation) {
  std::ostringstream os;
  os << "t,diameter,bound,margin\n";
  const auto m = static_cast<std::size_t>(traj.delay_nodes());
  const std::size_t last = traj.nodes() - 1;
  auto row = [&](std::size_t k) {
    const double t = traj.time_at(k);
    const double d = diameter(traj.state_at(k));
    const double b = bound_curve(bounds, std::max(t, 0.0));
    put17(os, t);
    os << ',';
    put17(os, d);
    os << ',';
    put17(os, b);
    os << ',';
    put17(os, b - d);
    os << '\n';
  };
  std::size_t written_last = m;
  for (std::size_t k = m; k <= last; k += static_cast<std::size_t>(decimation)) {
    row(k);
    written_last = k;
  }
  if (written_last != last) row(last);
  return os.str();
}

struct Pipeline {
  WfCertificate cert;
  Psi0 psi0;
  BoundSet bounds;
  std::optional<Trajectory> traj;
  std::optional<VerificationReport> report;
};

// thrown when the (WF) hypothesis cannot be certified: a failed check, not a
// config error
struct CertifyError {
  WfFailure failure;
};

WfCertificate certify_or_throw(const RunConfig& c, double grid) {
  WfResult res =
      certify_wf(c.weight, c.T, c.alpha_bar, c.horizon, c.delayed ? c.tau : 0.0, grid);
  if (std::holds_alternative<WfFailure>(res)) throw CertifyError{std::get<WfFailure>(res)};
  return std::get<WfCertificate>(res);
}

Trajectory load_or_simulate(const RunConfig& c) {
  if (!c.trajectory_in.empty()) {
    std::ifstream is(c.trajectory_in);
    if (!is) throw ConfigError("cannot open trajectory_in: " + c.trajectory_in);
    Trajectory traj = read_trajectory_csv(is);
    if (traj.agents() != c.N || traj.dim() != c.d)
      throw ConfigError("trajectory_in does not match agents.N/agents.d");
    const double want_tau = c.delayed ? c.tau : 0.0;
    if (std::abs(traj.tau() - want_tau) > 1e-6 * std::max(1.0, want_tau))
      throw ConfigError("trajectory_in delay segment does not match model.tau");
    return traj;
  }
  return simulate(build_history(c), c.influence, c.weight, c.delayed ? c.tau : 0.0, c.sim);
}

Pipeline run_verify_pipeline(const RunConfig& c) {
  Pipeline p;
  p.traj = load_or_simulate(c);
  const Trajectory& traj = *p.traj;
  // partition times aligned to the run's grid: checks read exact node states
  p.cert = certify_or_throw(c, traj.h());

  const auto m = static_cast<std::size_t>(traj.delay_nodes());
  double M0 = 0.0;
  for (std::size_t k = 0; k <= m; ++k) M0 = std::max(M0, compute_M0(traj.state_at(k)));
  p.psi0 = compute_psi0(c.influence, M0, c.d);

  const double K = c.influence.k_sup();
  p.bounds = c.delayed ? constants_delayed(K, p.cert.T, c.tau, p.psi0.value, c.alpha_bar)
                       : constants_undelayed(K, p.cert.T, p.psi0.value, c.alpha_bar);
  p.bounds.M0 = M0;
  p.bounds.d0 = c.delayed ? window_diameter(traj, -c.tau, 0.0) : diameter(traj.state_at(m));
  if (c.gamma_override) p.bounds.gamma = *c.gamma_override;

  p.report = verify_trajectory(traj, p.bounds, p.cert, c.hull);
  return p;
}

Json report_json_for(const RunConfig& c, const Pipeline& p) {
  Json j{{"tool", kToolName},
         {"version", kToolVersion},
         {"certified", true},
         {"certificate", cert_to_json(p.cert)},
         {"constants", bounds_to_json(p.bounds, p.psi0.sampled)},
         {"verification", checks_to_json(*p.report)}};
  if (c.gamma_override) j["gamma_override"] = *c.gamma_override;
  if (!c.delayed) {
    const RegimeComparison cmp =
        compare_regimes(p.bounds.K, p.bounds.T, p.bounds.psi0, p.bounds.alpha_bar);
    Json table = Json::array();
    for (const auto& r : cmp.table)
      table.push_back(Json{{"t", r.t},
                           {"undelayed_bound", r.undelayed_bound},
                           {"delayed_bound", r.delayed_bound}});
    j["regime_comparison"] = Json{{"gamma", cmp.gamma},
                                  {"gamma_tilde", cmp.gamma_tilde},
                                  {"undelayed_dominates", cmp.undelayed_dominates},
                                  {"table", std::move(table)}};
  }
  return j;
}

RunOutcome run_simulate(const RunConfig& c, const fs::path& out) {
  const Trajectory traj =
      simulate(build_history(c), c.influence, c.weight, c.delayed ? c.tau : 0.0, c.sim);
  write_file(out / c.out_trajectory, trajectory_csv(traj, c.decimation));
  write_manifest(out, c, {c.out_trajectory});
  std::printf("simulate: %zu steps, d(t_end) = %.6e%s\n", traj.stats().steps,
              diameter(traj.state_at(traj.nodes() - 1)),
              traj.stats().consensus_stopped ? " (consensus reached, stopped early)" : "");
  return {0, "ok"};
}

RunOutcome run_verify(const RunConfig& c, const fs::path& out) {
  Pipeline p;
  try {
    p = run_verify_pipeline(c);
  } catch (const CertifyError& e) {  // a failed hypothesis check, exit 1
    Json j{{"tool", kToolName},
           {"version", kToolVersion},
           {"certified", false},
           {"failure", failure_to_json(e.failure)}};
    write_file(out / c.out_report, j.dump(2) + "\n");
    write_manifest(out, c, {c.out_report});
    std::printf("  [FAIL] wf_certificate        %s\n", e.failure.reason.c_str());
    return {1, "(WF) certification failed: " + e.failure.reason};
  }
  write_file(out / c.out_trajectory, trajectory_csv(*p.traj, c.decimation));
  write_file(out / c.out_bounds, bounds_csv(*p.traj, p.bounds, c.decimation));
  write_file(out / c.out_report, report_json_for(c, p).dump(2) + "\n");
  write_manifest(out, c, {c.out_trajectory, c.out_bounds, c.out_report});
  print_report(*p.report);
  return {p.report->pass ? 0 : 1, p.report->pass ? "all checks passed" : "check failure"};
}

RunOutcome run_certify(const RunConfig& c, const fs::path& out) {
  const WfResult res =
      certify_wf(c.weight, c.T, c.alpha_bar, c.horizon, c.delayed ? c.tau : 0.0);
  Json j{{"tool", kToolName}, {"version", kToolVersion}};
  int code = 0;
  if (std::holds_alternative<WfCertificate>(res)) {
    const auto& cert = std::get<WfCertificate>(res);
    j["certified"] = true;
    j["certificate"] = cert_to_json(cert);
    std::printf("certify-wf: %zu intervals, effective T = %.6g, quadrature error %.3e\n",
                cert.intervals(), cert.T, cert.quadrature_error);
  } else {
    const auto& f = std::get<WfFailure>(res);
    j["certified"] = false;
    j["failure"] = failure_to_json(f);
    std::printf("certify-wf: FAILED (%s on [%.6g, %.6g], achieved %.6g < %.6g)\n",
                f.reason.c_str(), f.window_start, f.window_end, f.achieved, f.required);
    code = 1;
  }
  write_file(out / c.out_report, j.dump(2) + "\n");
  write_manifest(out, c, {c.out_report});
  return {code, code == 0 ? "certified" : "certification failed"};
}

template <typename F>
void parallel_for(std::size_t count, int threads, F&& body) {
  threads = std::clamp<int>(threads, 1, static_cast<int>(count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

const std::vector<std::string>& canonical_check_order() {
  static const std::vector<std::string> names{
      "decay_bound",     "interval_contraction", "window_contraction", "window_recursion",
      "monotone_diameters", "hull_confinement",  "uniform_bound",      "suffix_diameter"};
  return names;
}

RunOutcome run_sweep(const RunConfig& base, const fs::path& out, int threads) {
  struct Cell {
    std::vector<std::pair<std::string, double>> labels;
    RunConfig cfg;
  };
  std::vector<Cell> cells;
  const auto& ax0 = base.axes.at(0);
  if (base.axes.size() == 1) {
    for (const double v : ax0.values)
      cells.push_back({{{ax0.param, v}}, apply_axis(base, ax0.param, v)});
  } else {
    const auto& ax1 = base.axes.at(1);
    for (const double v0 : ax0.values)
      for (const double v1 : ax1.values)
        cells.push_back({{{ax0.param, v0}, {ax1.param, v1}},
                         apply_axis(apply_axis(base, ax0.param, v0), ax1.param, v1)});
  }

  struct CellResult {
    bool pass = false;
    std::string note;
    Json report;
    BoundSet bounds;
    std::vector<std::pair<std::string, double>> margins;
  };
  std::vector<CellResult> results(cells.size());

  parallel_for(cells.size(), threads, [&](std::size_t i) {
    CellResult& r = results[i];
    try {
      const Pipeline p = run_verify_pipeline(cells[i].cfg);
      r.pass = p.report->pass;
      r.bounds = p.bounds;
      r.report = report_json_for(cells[i].cfg, p);
      for (const auto& c : p.report->checks) r.margins.emplace_back(c.name, c.worst_margin);
      r.note = r.pass ? "pass" : "check failure";
    } catch (const CertifyError& e) {
      r.pass = false;
      r.note = "(WF) certification failed";
      r.report = Json{{"certified", false}, {"failure", failure_to_json(e.failure)}};
    }
  });

  fs::create_directories(out / "cells");
  std::ostringstream csv;
  for (const auto& [name, _] : cells.front().labels) csv << name << ',';
  csv << "pass,C,C_tilde,gamma,d0";
  for (const auto& name : canonical_check_order()) csv << ',' << name;
  csv << '\n';
  bool all_pass = true;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellResult& r = results[i];
    all_pass = all_pass && r.pass;
    for (const auto& [_, v] : cells[i].labels) {
      put17(csv, v);
      csv << ',';
    }
    csv << (r.pass ? 1 : 0);
    csv << ',';
    put17(csv, r.bounds.C);
    csv << ',';
    if (r.bounds.C_tilde) put17(csv, *r.bounds.C_tilde);
    csv << ',';
    put17(csv, r.bounds.gamma);
    csv << ',';
    put17(csv, r.bounds.d0);
    for (const auto& name : canonical_check_order()) {
      csv << ',';
      for (const auto& [n, m] : r.margins)
        if (n == name) {
          put17(csv, m);
          break;
        }
    }
    csv << '\n';
    write_file(out / "cells" / ("cell_" + std::to_string(i) + ".report.json"),
               r.report.dump(2) + "\n");
    std::printf("  cell %zu [", i);
    for (const auto& [n, v] : cells[i].labels) std::printf(" %s=%g", n.c_str(), v);
    std::printf(" ] %s\n", r.note.c_str());
  }
  write_file(out / base.out_summary, csv.str());
  write_manifest(out, base, {base.out_summary});
  return {all_pass ? 0 : 1, all_pass ? "all cells passed" : "cell failure"};
}

RunOutcome run_meanfield(const RunConfig& c, const fs::path& out) {
  StudySpec spec;
  spec.N_list = c.mf_N_list;
  spec.dim = c.d;
  spec.influence = c.influence;
  spec.weight = c.weight;
  spec.tau = c.delayed ? c.tau : 0.0;
  spec.T = c.T;
  spec.alpha_bar = c.alpha_bar;
  spec.horizon = c.horizon;
  spec.box_low = c.mf_low;
  spec.box_high = c.mf_high;
  spec.seed = c.mf_seed;
  spec.sim = c.sim;
  spec.w1_times = c.mf_w1_times;
  spec.budget = c.mf_budget;

  const StudyReport study = meanfield_decay_study(spec);

  std::ostringstream csv;
  csv << "N,t,d_X,envelope,w1_to_next_N\n";
  for (const auto& r : study.rows) {
    csv << r.N << ',';
    put17(csv, r.t);
    csv << ',';
    put17(csv, r.dX);
    csv << ',';
    put17(csv, r.envelope);
    csv << ',';
    if (std::isfinite(r.w1_next)) put17(csv, r.w1_next);
    csv << '\n';
  }
  write_file(out / c.out_study, csv.str());

  Json inst = Json::array();
  for (const auto& i : study.instances) {
    inst.push_back(Json{{"N", i.N},
                        {"gamma_env", i.gamma_env},
                        {"offset", i.offset},
                        {"max_history_dX", i.max_history_dX},
                        {"worst_margin", i.worst_margin},
                        {"envelope_pass", i.envelope_pass},
                        {"final_dX", i.final_dX}});
    std::printf("  [%s] N=%-4d gamma_env=%.6g worst_margin=% .3e final d_X=%.3e\n",
                i.envelope_pass ? "PASS" : "FAIL", i.N, i.gamma_env, i.worst_margin, i.final_dX);
  }
  Json j{{"tool", kToolName},
         {"version", kToolVersion},
         {"lipschitz_L", study.lipschitz_L},
         {"instances", std::move(inst)},
         {"pass", study.pass}};
  write_file(out / c.out_report, j.dump(2) + "\n");
  write_manifest(out, c, {c.out_study, c.out_report});
  return {study.pass ? 0 : 1, study.pass ? "envelopes hold" : "envelope failure"};
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HK_LAPSE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

RunOutcome run_config(RunMode mode, const Json& doc, const std::string& out_dir,
                      std::optional<long long> seed_override,
                      std::optional<double> gamma_override, int threads) {
  try {
    const Json* body = &doc;
    if (doc.is_object() && doc.contains("tool") && doc.contains("config"))
      body = &doc.at("config");  // manifests re-run as-is

    RunConfig cfg = parse_config(*body, mode);
    if (seed_override) {  // hull direction seed stays pinned for reproducible reports
      const auto s = static_cast<std::uint64_t>(*seed_override);
      cfg.history_seed = s;
      cfg.mf_seed = s;
    }
    if (gamma_override) {
      if (!(*gamma_override > 0.0)) throw ConfigError("--gamma-override must be > 0");
      cfg.gamma_override = gamma_override;
    }
    if (threads > 0) cfg.threads = threads;

    const fs::path out(out_dir.empty() ? "." : out_dir);
    fs::create_directories(out);

    switch (mode) {
      case RunMode::simulate:
        return run_simulate(cfg, out);
      case RunMode::verify:
        return run_verify(cfg, out);
      case RunMode::certify_wf:
        return run_certify(cfg, out);
      case RunMode::sweep:
        return run_sweep(cfg, out, resolve_threads(cfg.threads));
      case RunMode::meanfield:
        return run_meanfield(cfg, out);
    }
    return {3, "unhandled mode"};
  } catch (const ConfigError& e) {
    return {2, e.what()};
  } catch (const Json::exception& e) {
    return {2, std::string("config: ") + e.what()};
  } catch (const std::invalid_argument& e) {
    return {2, e.what()};
  } catch (const std::domain_error& e) {
    return {2, e.what()};
  } catch (const std::exception& e) {
    return {3, e.what()};
  }
}

RunOutcome run_from_file(RunMode mode, const std::string& config_path, const std::string& out_dir,
                         std::optional<long long> seed_override,
                         std::optional<double> gamma_override, int threads) {
  Json doc;
  try {
    std::ifstream is(config_path);
    if (!is) return {2, "cannot open config: " + config_path};
    doc = Json::parse(is);
  } catch (const std::exception& e) {
    return {2, std::string("config parse error: ") + e.what()};
  }
  return run_config(mode, doc, out_dir, seed_override, gamma_override, threads);
}

}  // namespace hklapse
