#pragma once

#include "hklapse/common.hpp"
#include "hklapse/history.hpp"
#include "hklapse/influence.hpp"
#include "hklapse/integrator.hpp"
#include "hklapse/verify.hpp"
#include "hklapse/weight.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hklapse {

using Json = nlohmann::json;

enum class RunMode { simulate, verify, sweep, meanfield, certify_wf };

const char* mode_name(RunMode m);
RunMode mode_from_name(const std::string& s);

struct SweepAxis {
  std::string param;  // one of: tau, alpha_bar, duty, N, seed
  std::vector<double> values;
};

/// Fully validated, defaults-materialized run description. Every stochastic
/// element carries an explicit seed; unknown config keys are errors.
struct RunConfig {
  RunMode mode = RunMode::simulate;

  bool delayed = false;
  double tau = 0.0;
  int N = 0;
  int d = 0;

  InfluenceSpec influence = InfluenceSpec::Constant(1.0);
  WeightSpec weight = WeightSpec::ConstantOne();

  // history description (kept as data so manifests can re-materialize it)
  std::string history_type;  // point | constant | constant_random | ramp | sampled
  Mat history_values;        // point/constant (d x N), or ramp start
  Mat history_to;            // ramp end
  Vec history_low, history_high;
  std::uint64_t history_seed = 0;
  std::vector<double> history_times;
  std::vector<Mat> history_states;

  bool has_wf = false;
  double T = 0.0, alpha_bar = 0.0, horizon = 0.0;

  SimOptions sim;
  int decimation = 1;

  HullOptions hull;
  std::optional<double> gamma_override;
  std::string trajectory_in;  // verify a stored trajectory instead of simulating

  std::string out_trajectory = "trajectory.csv";
  std::string out_bounds = "bounds.csv";
  std::string out_report = "report.json";
  std::string out_manifest = "manifest.json";
  std::string out_summary = "summary.csv";
  std::string out_study = "study.csv";

  std::vector<SweepAxis> axes;

  bool has_meanfield = false;
  std::vector<int> mf_N_list;
  Vec mf_low, mf_high;
  std::uint64_t mf_seed = 0;
  int mf_w1_times = 11;
  double mf_budget = 5e7;

  int threads = 0;  // 0 = resolve from env / hardware
};

/// Parse + validate against the strict schema. `mode` comes from the CLI
/// subcommand; a "mode" key in the file must agree with it.
RunConfig parse_config(const Json& j, RunMode mode);

/// Defaults-materialized echo of the config; a superset of the input and
/// itself parseable.
Json materialize(const RunConfig& c);

/// Instantiate the history spec (samples the seeded families).
HistorySpec build_history(const RunConfig& c);

Json influence_to_json(const InfluenceSpec& s);
Json weight_to_json(const WeightSpec& s);
InfluenceSpec influence_from_json(const Json& j);
WeightSpec weight_from_json(const Json& j);

/// Apply one sweep-axis value to a copy of the base config.
RunConfig apply_axis(const RunConfig& base, const std::string& param, double value);

}  // namespace hklapse
