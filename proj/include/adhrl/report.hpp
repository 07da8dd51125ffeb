#pragma once

#include <string>
#include <vector>

#include "adhrl/agent.hpp"

namespace adhrl {

struct RunMetrics {
  std::string run_name;
  std::string mode;
  std::vector<MetricsRow> rows;
};

// Reads a single run directory (metrics.csv + config.txt written by training).
RunMetrics read_run_dir(const std::string& dir);

// Expands an argument into run directories: a directory containing
// metrics.csv is one run; otherwise every seed_* child holding one is taken.
std::vector<RunMetrics> collect_runs(const std::vector<std::string>& dirs);

// Cross-run mean / std (population, N divisor) of the evaluation return at
// each interval, grouped and labeled by mode, plus a final-row summary.
// Throws ConfigError when runs of the same mode disagree on the eval grid.
std::string aggregate_report(const std::vector<RunMetrics>& runs);

}  // namespace adhrl
