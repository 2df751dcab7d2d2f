#include "hklapse/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hklapse {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const Json& j, const std::string& ctx, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(ctx + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail("unknown key '" + key + "' in " + ctx);
}

const Json& get(const Json& j, const std::string& ctx, const std::string& key) {
  if (!j.contains(key)) fail("missing key '" + key + "' in " + ctx);
  return j.at(key);
}

double get_num(const Json& j, const std::string& ctx, const std::string& key) {
  const Json& v = get(j, ctx, key);
  if (!v.is_number()) fail("'" + key + "' in " + ctx + " must be a number");
  return v.get<double>();
}

double get_num_or(const Json& j, const std::string& ctx, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  return get_num(j, ctx, key);
}

long long get_int(const Json& j, const std::string& ctx, const std::string& key) {
  const Json& v = get(j, ctx, key);
  if (!v.is_number_integer()) fail("'" + key + "' in " + ctx + " must be an integer");
  return v.get<long long>();
}

std::uint64_t get_seed(const Json& j, const std::string& ctx, const std::string& key) {
  const Json& v = get(j, ctx, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail("'" + key + "' in " + ctx + " must be an integer seed");
  return v.get<std::uint64_t>();
}

std::string get_str(const Json& j, const std::string& ctx, const std::string& key) {
  const Json& v = get(j, ctx, key);
  if (!v.is_string()) fail("'" + key + "' in " + ctx + " must be a string");
  return v.get<std::string>();
}

Vec get_vec(const Json& j, const std::string& ctx, int expect_len) {
  if (!j.is_array()) fail(ctx + " must be an array of numbers");
  Vec v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) fail(ctx + " must contain numbers only");
    v[k] = j[k].get<double>();
  }
  if (expect_len >= 0 && v.size() != expect_len)
    fail(ctx + " must have length " + std::to_string(expect_len));
  return v;
}

// values: [[x_1_1..x_1_d], ..., [x_N_1..x_N_d]] -> d x N
Mat get_state(const Json& j, const std::string& ctx, int N, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != N)
    fail(ctx + " must be an array of N = " + std::to_string(N) + " agent vectors");
  Mat x(d, N);
  for (int i = 0; i < N; ++i) x.col(i) = get_vec(j[i], ctx + "[" + std::to_string(i) + "]", d);
  return x;
}

Json state_to_json(const Mat& x) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < x.rows(); ++k) row.push_back(x(k, i));
    out.push_back(row);
  }
  return out;
}

Json vec_to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

}  // namespace

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::verify: return "verify";
    case RunMode::sweep: return "sweep";
    case RunMode::meanfield: return "meanfield";
    case RunMode::certify_wf: return "certify-wf";
  }
  return "?";
}

RunMode mode_from_name(const std::string& s) {
  if (s == "simulate") return RunMode::simulate;
  if (s == "verify") return RunMode::verify;
  if (s == "sweep") return RunMode::sweep;
  if (s == "meanfield") return RunMode::meanfield;
  if (s == "certify-wf") return RunMode::certify_wf;
  fail("unknown mode '" + s + "'");
}

InfluenceSpec influence_from_json(const Json& j) {
  const std::string fam = get_str(j, "influence", "family");
  try {
    if (fam == "constant") {
      check_keys(j, "influence", {"family", "c"});
      return InfluenceSpec::Constant(get_num(j, "influence", "c"));
    }
    if (fam == "radial_power") {
      check_keys(j, "influence", {"family", "K", "beta"});
      return InfluenceSpec::RadialPower(get_num(j, "influence", "K"),
                                        get_num(j, "influence", "beta"));
    }
    if (fam == "radial_table") {
      check_keys(j, "influence", {"family", "radii", "values"});
      const Vec r = get_vec(get(j, "influence", "radii"), "influence.radii", -1);
      const Vec v = get_vec(get(j, "influence", "values"), "influence.values", -1);
      return InfluenceSpec::RadialTable(std::vector<double>(r.begin(), r.end()),
                                        std::vector<double>(v.begin(), v.end()));
    }
  } catch (const std::invalid_argument& e) {
    fail(std::string("influence: ") + e.what());
  }
  fail("unknown influence family '" + fam + "'");
}

Json influence_to_json(const InfluenceSpec& s) {
  Json j;
  switch (s.family()) {
    case InfluenceFamily::constant:
      j["family"] = "constant";
      j["c"] = s.constant_value();
      break;
    case InfluenceFamily::radial_power:
      j["family"] = "radial_power";
      j["K"] = s.power_K();
      j["beta"] = s.power_beta();
      break;
    case InfluenceFamily::radial_table:
      j["family"] = "radial_table";
      j["radii"] = s.table_radii();
      j["values"] = s.table_values();
      break;
    case InfluenceFamily::custom:
      fail("custom influences are not serializable");
  }
  return j;
}

WeightSpec weight_from_json(const Json& j) {
  const std::string fam = get_str(j, "weight", "family");
  try {
    if (fam == "constant_one") {
      check_keys(j, "weight", {"family"});
      return WeightSpec::ConstantOne();
    }
    if (fam == "square_wave") {
      check_keys(j, "weight", {"family", "period", "duty", "phase", "ramp"});
      return WeightSpec::SquareWave(
          get_num(j, "weight", "period"), get_num(j, "weight", "duty"),
          get_num_or(j, "weight", "phase", 0.0), get_num_or(j, "weight", "ramp", 0.0));
    }
    if (fam == "clipped_sinusoid") {
      check_keys(j, "weight", {"family", "period", "floor"});
      return WeightSpec::ClippedSinusoid(get_num(j, "weight", "period"),
                                         get_num(j, "weight", "floor"));
    }
    if (fam == "dropout_schedule") {
      check_keys(j, "weight", {"family", "intervals", "ramp"});
      const Json& iv = get(j, "weight", "intervals");
      if (!iv.is_array()) fail("weight.intervals must be an array of [a, b] pairs");
      std::vector<std::pair<double, double>> intervals;
      for (const auto& p : iv) {
        const Vec ab = get_vec(p, "weight.intervals entry", 2);
        intervals.emplace_back(ab[0], ab[1]);
      }
      return WeightSpec::DropoutSchedule(std::move(intervals),
                                         get_num_or(j, "weight", "ramp", 0.0));
    }
  } catch (const std::invalid_argument& e) {
    fail(std::string("weight: ") + e.what());
  }
  fail("unknown weight family '" + fam + "'");
}

Json weight_to_json(const WeightSpec& s) {
  Json j;
  switch (s.family()) {
    case WeightFamily::constant_one:
      j["family"] = "constant_one";
      break;
    case WeightFamily::square_wave:
      j["family"] = "square_wave";
      j["period"] = s.period();
      j["duty"] = s.duty();
      j["phase"] = s.phase();
      j["ramp"] = s.ramp();
      break;
    case WeightFamily::clipped_sinusoid:
      j["family"] = "clipped_sinusoid";
      j["period"] = s.period();
      j["floor"] = s.floor_value();
      break;
    case WeightFamily::dropout_schedule: {
      j["family"] = "dropout_schedule";
      Json iv = Json::array();
      for (const auto& [a, b] : s.intervals()) iv.push_back(Json::array({a, b}));
      j["intervals"] = std::move(iv);
      j["ramp"] = s.ramp();
      break;
    }
    case WeightFamily::custom:
      fail("custom weights are not serializable");
  }
  return j;
}

namespace {

void parse_history(const Json& j, RunConfig& c) {
  const std::string type = get_str(j, "history", "type");
  c.history_type = type;
  if (type == "point" || type == "constant") {
    check_keys(j, "history", {"type", "values"});
    c.history_values = get_state(get(j, "history", "values"), "history.values", c.N, c.d);
    if (type == "point" && c.delayed && c.tau > 0.0)
      fail("history type 'point' requires the undelayed model (use 'constant')");
    return;
  }
  if (type == "constant_random") {
    check_keys(j, "history", {"type", "low", "high", "seed"});
    c.history_low = get_vec(get(j, "history", "low"), "history.low", c.d);
    c.history_high = get_vec(get(j, "history", "high"), "history.high", c.d);
    for (int k = 0; k < c.d; ++k)
      if (c.history_low[k] > c.history_high[k]) fail("history box bounds out of order");
    c.history_seed = get_seed(j, "history", "seed");
    return;
  }
  if (type == "ramp") {
    check_keys(j, "history", {"type", "from", "to"});
    if (!c.delayed || c.tau <= 0.0) fail("history type 'ramp' requires the delayed model");
    c.history_values = get_state(get(j, "history", "from"), "history.from", c.N, c.d);
    c.history_to = get_state(get(j, "history", "to"), "history.to", c.N, c.d);
    return;
  }
  if (type == "sampled") {
    check_keys(j, "history", {"type", "times", "values"});
    if (!c.delayed || c.tau <= 0.0) fail("history type 'sampled' requires the delayed model");
    const Vec times = get_vec(get(j, "history", "times"), "history.times", -1);
    const Json& vals = get(j, "history", "values");
    if (!vals.is_array() || vals.size() != static_cast<std::size_t>(times.size()))
      fail("history.values must have one state per sample time");
    c.history_times.assign(times.begin(), times.end());
    c.history_states.clear();
    for (std::size_t k = 0; k < vals.size(); ++k)
      c.history_states.push_back(get_state(vals[k], "history.values entry", c.N, c.d));
    return;
  }
  fail("unknown history type '" + type + "'");
}

Json history_to_json(const RunConfig& c) {
  Json j;
  j["type"] = c.history_type;
  if (c.history_type == "point" || c.history_type == "constant") {
    j["values"] = state_to_json(c.history_values);
  } else if (c.history_type == "constant_random") {
    j["low"] = vec_to_json(c.history_low);
    j["high"] = vec_to_json(c.history_high);
    j["seed"] = c.history_seed;
  } else if (c.history_type == "ramp") {
    j["from"] = state_to_json(c.history_values);
    j["to"] = state_to_json(c.history_to);
  } else if (c.history_type == "sampled") {
    j["times"] = c.history_times;
    Json vals = Json::array();
    for (const Mat& s : c.history_states) vals.push_back(state_to_json(s));
    j["values"] = std::move(vals);
  }
  return j;
}

void parse_sweep(const Json& j, RunConfig& c) {
  check_keys(j, "sweep", {"axes"});
  const Json& axes = get(j, "sweep", "axes");
  if (!axes.is_array() || axes.empty() || axes.size() > 2)
    fail("sweep.axes must list one or two axes");
  static const std::set<std::string> allowed{"tau", "alpha_bar", "duty", "N", "seed"};
  for (const auto& a : axes) {
    check_keys(a, "sweep axis", {"param", "values"});
    SweepAxis axis;
    axis.param = get_str(a, "sweep axis", "param");
    if (!allowed.count(axis.param)) fail("unsupported sweep param '" + axis.param + "'");
    const Vec v = get_vec(get(a, "sweep axis", "values"), "sweep axis values", -1);
    if (v.size() == 0) fail("sweep axis '" + axis.param + "' has no values");
    axis.values.assign(v.begin(), v.end());
    c.axes.push_back(std::move(axis));
  }
  if (c.axes.size() == 2 && c.axes[0].param == c.axes[1].param)
    fail("sweep axes must differ");
}

void parse_meanfield(const Json& j, RunConfig& c) {
  check_keys(j, "meanfield", {"N_list", "low", "high", "seed", "w1_times", "budget"});
  const Json& nl = get(j, "meanfield", "N_list");
  if (!nl.is_array() || nl.empty()) fail("meanfield.N_list must be a nonempty array");
  for (const auto& n : nl) {
    if (!n.is_number_integer() || n.get<long long>() < 2)
      fail("meanfield.N_list entries must be integers >= 2");
    c.mf_N_list.push_back(static_cast<int>(n.get<long long>()));
  }
  c.mf_low = get_vec(get(j, "meanfield", "low"), "meanfield.low", c.d);
  c.mf_high = get_vec(get(j, "meanfield", "high"), "meanfield.high", c.d);
  c.mf_seed = get_seed(j, "meanfield", "seed");
  if (j.contains("w1_times")) c.mf_w1_times = static_cast<int>(get_int(j, "meanfield", "w1_times"));
  if (c.mf_w1_times < 2) fail("meanfield.w1_times must be >= 2");
  c.mf_budget = get_num_or(j, "meanfield", "budget", c.mf_budget);
  c.has_meanfield = true;
}

}  // namespace

RunConfig parse_config(const Json& j, RunMode mode) {
  check_keys(j, "config",
             {"mode", "model", "agents", "influence", "weight", "history", "wf", "integrator",
              "verify", "overrides", "outputs", "sweep", "meanfield", "trajectory_in",
              "threads"});
  RunConfig c;
  c.mode = mode;
  if (j.contains("mode") && mode_from_name(get_str(j, "config", "mode")) != mode)
    fail("config mode '" + get_str(j, "config", "mode") + "' does not match the command");

  {
    const Json& m = get(j, "config", "model");
    const std::string type = get_str(m, "model", "type");
    if (type == "undelayed") {
      check_keys(m, "model", {"type"});
    } else if (type == "delayed") {
      check_keys(m, "model", {"type", "tau"});
      c.delayed = true;
      c.tau = get_num(m, "model", "tau");
      if (!(std::isfinite(c.tau) && c.tau >= 0.0)) fail("model.tau must be >= 0");
    } else {
      fail("model.type must be 'undelayed' or 'delayed'");
    }
  }
  {
    const Json& a = get(j, "config", "agents");
    check_keys(a, "agents", {"N", "d"});
    c.N = static_cast<int>(get_int(a, "agents", "N"));
    c.d = static_cast<int>(get_int(a, "agents", "d"));
    if (c.N < 2) fail("agents.N must be >= 2");
    if (c.d < 1) fail("agents.d must be >= 1");
  }
  c.influence = influence_from_json(get(j, "config", "influence"));
  c.weight = weight_from_json(get(j, "config", "weight"));
  parse_history(get(j, "config", "history"), c);

  if (j.contains("wf")) {
    const Json& w = j.at("wf");
    check_keys(w, "wf", {"T", "alpha_bar", "horizon"});
    c.T = get_num(w, "wf", "T");
    c.alpha_bar = get_num(w, "wf", "alpha_bar");
    c.horizon = get_num(w, "wf", "horizon");
    if (!(c.T > 0.0)) fail("wf.T must be > 0");
    if (!(c.alpha_bar > 0.0)) fail("wf.alpha_bar must be > 0");
    if (!(c.horizon > c.T)) fail("wf.horizon must exceed wf.T");
    c.has_wf = true;
  }
  {
    const Json& i = get(j, "config", "integrator");
    check_keys(i, "integrator", {"h", "t_end", "decimation", "stop_at_consensus"});
    c.sim.h = get_num_or(i, "integrator", "h", 1e-3);
    c.sim.t_end = get_num(i, "integrator", "t_end");
    if (!(c.sim.h > 0.0)) fail("integrator.h must be > 0");
    if (!(c.sim.t_end > 0.0)) fail("integrator.t_end must be > 0");
    if (i.contains("decimation")) c.decimation = static_cast<int>(get_int(i, "integrator", "decimation"));
    if (c.decimation < 1) fail("integrator.decimation must be >= 1");
    if (i.contains("stop_at_consensus")) {
      if (!i.at("stop_at_consensus").is_boolean()) fail("integrator.stop_at_consensus must be a bool");
      c.sim.stop_at_consensus = i.at("stop_at_consensus").get<bool>();
    }
  }
  if (j.contains("verify")) {
    const Json& v = j.at("verify");
    check_keys(v, "verify", {"hull_directions", "hull_seed", "anchors"});
    if (v.contains("hull_directions"))
      c.hull.directions = static_cast<int>(get_int(v, "verify", "hull_directions"));
    if (v.contains("hull_seed"))
      c.hull.seed = get_seed(v, "verify", "hull_seed");
    if (v.contains("anchors")) c.hull.anchors = static_cast<int>(get_int(v, "verify", "anchors"));
    if (c.hull.directions < 1 || c.hull.anchors < 1) fail("verify options must be >= 1");
  }
  if (j.contains("overrides")) {
    const Json& o = j.at("overrides");
    check_keys(o, "overrides", {"gamma"});
    if (o.contains("gamma")) {
      const double g = get_num(o, "overrides", "gamma");
      if (!(g > 0.0)) fail("overrides.gamma must be > 0");
      c.gamma_override = g;
    }
  }
  if (j.contains("outputs")) {
    const Json& o = j.at("outputs");
    check_keys(o, "outputs", {"trajectory", "bounds", "report", "manifest", "summary", "study"});
    if (o.contains("trajectory")) c.out_trajectory = get_str(o, "outputs", "trajectory");
    if (o.contains("bounds")) c.out_bounds = get_str(o, "outputs", "bounds");
    if (o.contains("report")) c.out_report = get_str(o, "outputs", "report");
    if (o.contains("manifest")) c.out_manifest = get_str(o, "outputs", "manifest");
    if (o.contains("summary")) c.out_summary = get_str(o, "outputs", "summary");
    if (o.contains("study")) c.out_study = get_str(o, "outputs", "study");
  }
  if (j.contains("trajectory_in")) {
    if (!j.at("trajectory_in").is_string()) fail("trajectory_in must be a path string");
    c.trajectory_in = j.at("trajectory_in").get<std::string>();
  }
  if (j.contains("threads")) {
    c.threads = static_cast<int>(get_int(j, "config", "threads"));
    if (c.threads < 0) fail("threads must be >= 0");
  }
  if (j.contains("sweep")) parse_sweep(j.at("sweep"), c);
  if (j.contains("meanfield")) parse_meanfield(j.at("meanfield"), c);

  // mode-specific requirements
  switch (mode) {
    case RunMode::simulate:
      break;
    case RunMode::verify:
    case RunMode::sweep:
      if (!c.has_wf) fail("verify/sweep runs need a wf block");
      if (mode == RunMode::sweep && c.axes.empty()) fail("sweep runs need a sweep block");
      break;
    case RunMode::meanfield:
      if (!c.has_wf) fail("meanfield runs need a wf block");
      if (!c.has_meanfield) fail("meanfield runs need a meanfield block");
      break;
    case RunMode::certify_wf:
      if (!c.has_wf) fail("certify-wf runs need a wf block");
      break;
  }
  if (c.has_wf && c.horizon < c.sim.t_end && mode != RunMode::certify_wf)
    fail("wf.horizon must cover integrator.t_end");
  return c;
}

Json materialize(const RunConfig& c) {
  Json j;
  j["mode"] = mode_name(c.mode);
  j["model"] = c.delayed ? Json{{"type", "delayed"}, {"tau", c.tau}} : Json{{"type", "undelayed"}};
  j["agents"] = {{"N", c.N}, {"d", c.d}};
  j["influence"] = influence_to_json(c.influence);
  j["weight"] = weight_to_json(c.weight);
  j["history"] = history_to_json(c);
  if (c.has_wf) j["wf"] = {{"T", c.T}, {"alpha_bar", c.alpha_bar}, {"horizon", c.horizon}};
  j["integrator"] = {{"h", c.sim.h},
                     {"t_end", c.sim.t_end},
                     {"decimation", c.decimation},
                     {"stop_at_consensus", c.sim.stop_at_consensus}};
  j["verify"] = {{"hull_directions", c.hull.directions},
                 {"hull_seed", c.hull.seed},
                 {"anchors", c.hull.anchors}};
  if (c.gamma_override) j["overrides"] = {{"gamma", *c.gamma_override}};
  j["outputs"] = {{"trajectory", c.out_trajectory}, {"bounds", c.out_bounds},
                  {"report", c.out_report},         {"manifest", c.out_manifest},
                  {"summary", c.out_summary},       {"study", c.out_study}};
  if (!c.trajectory_in.empty()) j["trajectory_in"] = c.trajectory_in;
  if (!c.axes.empty()) {
    Json axes = Json::array();
    for (const auto& a : c.axes) axes.push_back({{"param", a.param}, {"values", a.values}});
    j["sweep"] = {{"axes", std::move(axes)}};
  }
  if (c.has_meanfield) {
    j["meanfield"] = {{"N_list", c.mf_N_list}, {"low", vec_to_json(c.mf_low)},
                      {"high", vec_to_json(c.mf_high)}, {"seed", c.mf_seed},
                      {"w1_times", c.mf_w1_times}, {"budget", c.mf_budget}};
  }
  j["threads"] = c.threads;
  return j;
}

HistorySpec build_history(const RunConfig& c) {
  if (c.history_type == "point") return HistorySpec::Point(c.history_values);
  if (c.history_type == "constant") {
    return c.delayed && c.tau > 0.0 ? HistorySpec::Constant(c.history_values)
                                    : HistorySpec::Point(c.history_values);
  }
  if (c.history_type == "constant_random") {
    Rng rng(c.history_seed);
    Mat x(c.d, c.N);
    for (int i = 0; i < c.N; ++i)
      for (int k = 0; k < c.d; ++k) x(k, i) = rng.uniform(c.history_low[k], c.history_high[k]);
    return c.delayed && c.tau > 0.0 ? HistorySpec::Constant(x) : HistorySpec::Point(x);
  }
  if (c.history_type == "ramp") {
    const Mat from = c.history_values, to = c.history_to;
    const double tau = c.tau;
    return HistorySpec::Function(
        [from, to, tau](double s) -> Mat { return to + (s / tau) * (to - from); });
  }
  if (c.history_type == "sampled") return HistorySpec::Sampled(c.history_times, c.history_states);
  fail("unknown history type '" + c.history_type + "'");
}

RunConfig apply_axis(const RunConfig& base, const std::string& param, double value) {
  RunConfig c = base;
  if (param == "tau") {
    if (!c.delayed) fail("sweep over tau requires the delayed model");
    if (!(value >= 0.0)) fail("sweep tau values must be >= 0");
    c.tau = value;
  } else if (param == "alpha_bar") {
    if (!(value > 0.0)) fail("sweep alpha_bar values must be > 0");
    c.alpha_bar = value;
  } else if (param == "duty") {
    if (c.weight.family() != WeightFamily::square_wave)
      fail("sweep over duty requires a square_wave weight");
    c.weight = WeightSpec::SquareWave(c.weight.period(), value, c.weight.phase());
  } else if (param == "N") {
    if (c.history_type != "constant_random")
      fail("sweep over N requires a constant_random history");
    const int n = static_cast<int>(std::llround(value));
    if (n < 2) fail("sweep N values must be integers >= 2");
    c.N = n;
  } else if (param == "seed") {
    if (c.history_type != "constant_random")
      fail("sweep over seed requires a constant_random history");
    c.history_seed = static_cast<std::uint64_t>(std::llround(value));
  } else {
    fail("unsupported sweep param '" + param + "'");
  }
  return c;
}

}  // namespace hklapse
