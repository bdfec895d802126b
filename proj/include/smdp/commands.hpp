#pragma once

#include <string>
#include <utility>
#include <vector>

#include "smdp/config.hpp"
#include "smdp/error.hpp"

namespace smdp {

struct CommandOptions {
  unsigned threads = 1;
  bool simulate = false;  // sweep: add simulated throughput per threshold
};

struct CommandResult {
  ErrorCode status = ErrorCode::ok;  // ok or check_failed
  std::string command;
  std::string config_hash;
  std::string json;
  std::string csv;
  std::vector<double> values;
  /// Labelled thresholds: per slice for solve, per distribution for sweep.
  std::vector<std::pair<std::string, int>> thresholds;
};

CommandResult run_solve(const Config& config, const CommandOptions& options = {});
CommandResult run_sweep(const Config& config, const CommandOptions& options = {});
CommandResult run_simulate(const Config& config, const CommandOptions& options = {});
CommandResult run_check(const Config& config, const CommandOptions& options = {});

/// Dispatch by name: solve, sweep, simulate, check.
CommandResult run_command(const std::string& command, const Config& config, const CommandOptions& options = {});

}  // namespace smdp
