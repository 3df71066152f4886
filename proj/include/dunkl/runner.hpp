#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "dunkl/config.hpp"

namespace dunkl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitSolver = 3;

/// Environment variable that replaces run.output_dir when set and non-empty.
inline constexpr const char* kOutputDirEnv = "DUNKL_OUTPUT_DIR";

const char* version_string();

/// Command-line adjustments applied after parsing.
struct Overrides {
    std::optional<std::string> output_dir;
    std::optional<int> threads;
};

/// Executes the experiment and writes its CSV files, summary.json and, last,
/// manifest.json under cfg.output_dir.  Returns an exit code; diagnostics go
/// to `err`, a short human summary to `out`.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Prints derived quantities (dt, eps_n, L_k, p*) without simulating.
void describe(const ExperimentConfig& cfg, std::ostream& out);

/// File-level commands used by the CLI: read, parse, apply overrides, act.
int command_run(const std::string& config_path, const Overrides& o, std::ostream& out, std::ostream& err);
int command_describe(const std::string& config_path, std::ostream& out, std::ostream& err);
/// Parses the file and checks the model conditions; exit 0 only if both pass.
int command_validate(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace dunkl
