#pragma once

#include <string>
#include <vector>

#include "vpflow/config.hpp"
#include "vpflow/grid.hpp"

namespace vpflow {

/// Entry point behind the vpflow executable. Subcommands: run, oracle,
/// sweep-eps, check, prox-table. Exit codes: 0 success (all enabled checks
/// pass), 2 invalid config/usage, 3 run diverged, 4 checks failed.
int cli_run(int argc, const char* const* argv);

/// Snapshot files written by `run` into the output directory.
std::string snapshot_filename(int index);

/// Loads all snapshots of a run directory in time order.
std::vector<SimState> load_trajectory(const std::string& dir);

}  // namespace vpflow
