#pragma once

#include "config.hpp"
#include "output.hpp"

namespace symco::cli {

struct CommandResult {
  FileSet files;        // results.json, results.csv and plot-ready data files
  bool passed = true;   // false when an embedded check fails
};

// Throws ConfigError for parameter values the modules reject before any work starts.
CommandResult run_command(const RunConfig& config);

}  // namespace symco::cli
