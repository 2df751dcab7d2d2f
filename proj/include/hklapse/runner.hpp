#pragma once

#include "hklapse/config.hpp"

#include <optional>
#include <string>

namespace hklapse {

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 check failure, 2 config error, 3 runtime failure
  std::string message;
};

/// Execute a config document (or a manifest wrapping one) in the given mode,
/// writing all artifacts under out_dir.
RunOutcome run_config(RunMode mode, const Json& doc, const std::string& out_dir,
                      std::optional<long long> seed_override = std::nullopt,
                      std::optional<double> gamma_override = std::nullopt, int threads = 0);

/// Same, loading the document from a file path.
RunOutcome run_from_file(RunMode mode, const std::string& config_path, const std::string& out_dir,
                         std::optional<long long> seed_override = std::nullopt,
                         std::optional<double> gamma_override = std::nullopt, int threads = 0);

/// --threads flag if positive, else HK_LAPSE_THREADS, else hardware.
int resolve_threads(int requested);

}  // namespace hklapse
