#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace isolab {

enum class Command { measure_info, profile, flow, theta, psi, constants, ldp, conjecture };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command c);

struct RunConfig {
  Command command = Command::measure_info;
  std::string measure_spec_path;
  /// command-specific values keyed by flag name without dashes ("t-end", "alpha", ...)
  std::map<std::string, double> params;
  std::string out_path;  // empty: "<command>.csv" or ".json" in the working directory
  std::uint64_t seed = 0;
  std::optional<int> grid_nodes;
  std::optional<double> tol;
  bool timestamp = true;
};

/// 0 success, 2 completed with flagged numerics, 1 error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11) and calls run.
int cli_main(int argc, char** argv);

}  // namespace isolab
