#include "adhrl/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace fs = std::filesystem;

RunMetrics read_run_dir(const std::string& dir) {
  RunMetrics run;
  run.run_name = fs::path(dir).filename().string();

  std::ifstream cf(dir + "/config.txt");
  if (!cf) throw IoError("run directory missing config.txt: " + dir);
  std::string line;
  while (std::getline(cf, line)) {
    if (line.rfind("mode = ", 0) == 0) run.mode = line.substr(7);
  }
  if (run.mode.empty()) throw IoError("config.txt has no mode line: " + dir);

  std::ifstream mf(dir + "/metrics.csv");
  if (!mf) throw IoError("run directory missing metrics.csv: " + dir);
  run.rows = parse_metrics_csv(mf);
  if (run.rows.empty()) throw IoError("metrics.csv has no rows: " + dir);
  return run;
}

std::vector<RunMetrics> collect_runs(const std::vector<std::string>& dirs) {
  std::vector<RunMetrics> runs;
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    if (fs::exists(fs::path(dir) / "metrics.csv")) {
      runs.push_back(read_run_dir(dir));
      continue;
    }
    std::vector<std::string> children;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() &&
          entry.path().filename().string().rfind("seed_", 0) == 0 &&
          fs::exists(entry.path() / "metrics.csv"))
        children.push_back(entry.path().string());
    }
    std::sort(children.begin(), children.end());
    if (children.empty())
      throw IoError("no runs found under: " + dir);
    for (const auto& c : children) runs.push_back(read_run_dir(c));
  }
  return runs;
}

std::string aggregate_report(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw InsufficientData("aggregate_report: no runs");

  // Group by mode, keeping first-seen order stable for output.
  std::vector<std::string> mode_order;
  std::map<std::string, std::vector<const RunMetrics*>> by_mode;
  for (const auto& run : runs) {
    if (!by_mode.count(run.mode)) mode_order.push_back(run.mode);
    by_mode[run.mode].push_back(&run);
  }

  for (const auto& [mode, group] : by_mode) {
    const auto& ref = group.front()->rows;
    for (const auto* run : group) {
      if (run->rows.size() != ref.size())
        throw ConfigError("eval grids differ across runs for mode " + mode);
      for (std::size_t i = 0; i < ref.size(); ++i)
        if (run->rows[i].step != ref[i].step)
          throw ConfigError("eval grids differ across runs for mode " + mode);
    }
  }

  auto stats_at = [](const std::vector<const RunMetrics*>& group, std::size_t i) {
    double mean = 0.0;
    for (const auto* run : group) mean += run->rows[i].eval_return_mean;
    mean /= static_cast<double>(group.size());
    double var = 0.0;
    for (const auto* run : group) {
      const double d = run->rows[i].eval_return_mean - mean;
      var += d * d;
    }
    // Population std (N divisor); see README's metrics notes.
    return std::pair<double, double>(mean,
                                     std::sqrt(var / static_cast<double>(group.size())));
  };

  std::ostringstream os;
  os << "mode,step,runs,return_mean,return_std\n";
  for (const auto& mode : mode_order) {
    const auto& group = by_mode[mode];
    for (std::size_t i = 0; i < group.front()->rows.size(); ++i) {
      const auto [mean, sd] = stats_at(group, i);
      os << mode << ',' << group.front()->rows[i].step << ',' << group.size() << ','
         << format_double(mean) << ',' << format_double(sd) << '\n';
    }
  }
  os << "mode,runs,final_return_mean,final_return_std\n";
  for (const auto& mode : mode_order) {
    const auto& group = by_mode[mode];
    const auto [mean, sd] = stats_at(group, group.front()->rows.size() - 1);
    os << mode << ',' << group.size() << ',' << format_double(mean) << ','
       << format_double(sd) << '\n';
  }
  return os.str();
}

}  // namespace adhrl
