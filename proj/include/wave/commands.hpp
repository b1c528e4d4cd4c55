#ifndef WAVE_COMMANDS_HPP
#define WAVE_COMMANDS_HPP

#include "wave/config.hpp"
#include "wave/report.hpp"

#include <optional>
#include <string>

namespace wave {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitVerify = 3 };

struct CommandOptions {
  std::string config_path;
  int jobs = 1;
  std::optional<std::string> out_dir;  ///< overrides [output] directory
  bool quiet = false;                  ///< no human-readable table on stdout
};

struct CommandResult {
  int exit_code = kExitOk;
  Json report;              ///< null when the command failed before producing results
  std::string report_path;
  std::string error;
};

int exit_code_for(ErrorKind kind);

/// Runs `bounds`, `gamma`, `speed` or `verify`. Errors are caught and mapped
/// to exit codes; the message lands in `error` and on stderr.
CommandResult run_command(const std::string& command, const CommandOptions& opts);

CommandResult cmd_bounds(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_gamma(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_speed(const RunConfig& cfg, const CommandOptions& opts);
CommandResult cmd_verify(const RunConfig& cfg, const CommandOptions& opts);

/// Name of the equilibrium a profile's left end approaches: a1, a2, a3 for the
/// decoupled builtin, otherwise the coordinates.
std::string well_label(const PotentialConfig& cfg, const Point<double>& e);

}  // namespace wave

#endif  // WAVE_COMMANDS_HPP
