#pragma once

#include <string>
#include <vector>

#include "ldcluster/config.hpp"

namespace ldc {

struct CommandResult {
  std::string body;  ///< formatted output (csv or json per cfg.format)
  std::vector<std::string> warnings;
};

/// Subcommand names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one subcommand. Throws ConfigError (missing/invalid parameters),
/// PreconditionError, or NumericalError. Output is a deterministic function
/// of (cfg minus workers).
CommandResult run_command(const std::string& name, const RunConfig& cfg);

}  // namespace ldc
