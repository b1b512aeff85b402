#pragma once

#include "vg/config.hpp"

namespace vg {

enum ExitStatus : int { kExitOk = 0, kExitNumerical = 1, kExitConfig = 2 };

/// Runs the command's pipeline and writes <directory>/summary.json (also on
/// failure), profiles/*.csv and diagnostics*.csv. Returns the exit status.
int dispatch(const RunConfig& config);

/// parse_config + dispatch; errors go to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace vg
