#include "hklapse/runner.hpp"
#include "hklapse/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"Hegselmann-Krause consensus runs with intermittent interaction and delay: "
               "simulation, bound certification, and theorem-level verification"};
  app.set_version_flag("--version", std::string(hklapse::kToolName) + " " +
                                        hklapse::kToolVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  long long seed_override = 0;
  bool have_seed = false;
  double gamma_override = 0.0;
  bool have_gamma = false;
  int threads = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON, or a manifest)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (default: current)");
    cmd->add_option("--seed-override", seed_override, "replace config seeds")
        ->each([&](const std::string&) { have_seed = true; });
    cmd->add_option("--threads", threads, "worker threads (env HK_LAPSE_THREADS as fallback)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "integrate and export the trajectory");
  CLI::App* verify =
      app.add_subcommand("verify", "simulate (or load) a trajectory and certify every bound");
  CLI::App* sweep = app.add_subcommand("sweep", "verify over a one- or two-axis parameter grid");
  CLI::App* meanfield =
      app.add_subcommand("meanfield", "particle-level continuum study over a list of N");
  CLI::App* certify = app.add_subcommand("certify-wf", "certify the (WF) weight hypothesis");
  for (CLI::App* cmd : {simulate, verify, sweep, meanfield, certify}) add_common(cmd);
  verify->add_option("--gamma-override", gamma_override,
                     "replace the certified decay rate in the checks")
      ->each([&](const std::string&) { have_gamma = true; });

  CLI11_PARSE(app, argc, argv);

  hklapse::RunMode mode = hklapse::RunMode::simulate;
  if (verify->parsed()) mode = hklapse::RunMode::verify;
  if (sweep->parsed()) mode = hklapse::RunMode::sweep;
  if (meanfield->parsed()) mode = hklapse::RunMode::meanfield;
  if (certify->parsed()) mode = hklapse::RunMode::certify_wf;

  const hklapse::RunOutcome outcome = hklapse::run_from_file(
      mode, config_path, out_dir,
      have_seed ? std::optional<long long>(seed_override) : std::nullopt,
      have_gamma ? std::optional<double>(gamma_override) : std::nullopt, threads);
  if (outcome.exit_code != 0) std::fprintf(stderr, "%s: %s\n", hklapse::kToolName,
                                           outcome.message.c_str());
  return outcome.exit_code;
}
