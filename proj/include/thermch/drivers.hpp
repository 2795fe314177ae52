#pragma once

// Experiment drivers behind the CLI subcommands.  Configuration problems
// throw std::invalid_argument (mapped to exit 2 by the CLI); solver failures
// return 3 after flushing partial results; I/O failures throw io_error
// (mapped to exit 4).

#include "thermch/config.hpp"

#include <string>
#include <vector>

namespace thermch {

// Single run: series.csv, optional field snapshots, monitors.txt.
int cmd_run(const RunConfig& cfg);

// Same scenario at each regularization magnitude (applied to eps1..eps4
// jointly), one subdirectory per rung, plus a cross-rung summary with
// per-monitor max/min ratios and consecutive final-state L2 distances.
int cmd_continuation(const RunConfig& cfg, const std::vector<double>& eps_ladder);

// Manufactured-solution convergence study over grid levels with dt
// proportional to h^2; writes mms.csv with errors and observed orders.
int cmd_mms(const RunConfig& cfg, const std::vector<int>& levels);

// Re-derives the balance series and monitors from stored snapshots.
int cmd_report(const RunConfig& cfg);

} // namespace thermch
