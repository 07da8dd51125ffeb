#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adhrl/errors.hpp"
#include "adhrl/report.hpp"

using namespace adhrl;
namespace fs = std::filesystem;

namespace {

// Temporary run-directory tree, removed on destruction.
struct TempTree {
  fs::path root;
  TempTree() {
    root = fs::temp_directory_path() /
           ("adhrl_report_test_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempTree() { fs::remove_all(root); }
};

void write_run(const fs::path& dir, const std::string& mode,
               const std::vector<std::pair<long long, double>>& points) {
  fs::create_directories(dir);
  std::ofstream cf(dir / "config.txt");
  cf << "env_name = bimodal-bandit\n";
  cf << "mode = " << mode << "\n";
  cf << "seeds = 1\n";

  std::ofstream mf(dir / "metrics.csv");
  mf << "step,eval_return_mean,eval_return_std,critic_loss_1,critic_loss_2,"
        "option_loss,mi_estimate,usage_0,usage_1,option_action_separation\n";
  for (const auto& [step, ret] : points)
    mf << step << ',' << ret << ",0,0,0,0,0,0.5,0.5,0\n";
}

RunMetrics make_run(const std::string& name, const std::string& mode,
                    const std::vector<std::pair<long long, double>>& points) {
  RunMetrics run;
  run.run_name = name;
  run.mode = mode;
  for (const auto& [step, ret] : points) {
    MetricsRow row;
    row.step = step;
    row.eval_return_mean = ret;
    run.rows.push_back(row);
  }
  return run;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("read_run_dir picks up mode and metrics rows") {
  TempTree tree;
  write_run(tree.root / "run_a", "adinfohrl", {{100, 0.5}, {200, 0.75}});
  const RunMetrics run = read_run_dir((tree.root / "run_a").string());
  CHECK(run.run_name == "run_a");
  CHECK(run.mode == "adinfohrl");
  REQUIRE(run.rows.size() == 2);
  CHECK(run.rows[0].step == 100);
  CHECK(run.rows[1].eval_return_mean == 0.75);

  fs::create_directories(tree.root / "no_config");
  CHECK_THROWS_WITH_AS((void)read_run_dir((tree.root / "no_config").string()),
                       doctest::Contains("config.txt"), IoError);

  fs::create_directories(tree.root / "no_metrics");
  std::ofstream((tree.root / "no_metrics" / "config.txt").string())
      << "mode = td3\n";
  CHECK_THROWS_WITH_AS((void)read_run_dir((tree.root / "no_metrics").string()),
                       doctest::Contains("metrics.csv"), IoError);
}

TEST_CASE("collect_runs expands seed children and accepts direct run dirs") {
  TempTree tree;
  write_run(tree.root / "multi" / "seed_2", "adinfohrl", {{100, 0.2}});
  write_run(tree.root / "multi" / "seed_10", "adinfohrl", {{100, 0.4}});
  write_run(tree.root / "single", "td3", {{100, 0.9}});
  fs::create_directories(tree.root / "multi" / "notes");  // ignored: no metrics

  const auto runs = collect_runs(
      {(tree.root / "multi").string(), (tree.root / "single").string()});
  REQUIRE(runs.size() == 3);
  // Children come in sorted name order.
  CHECK(runs[0].run_name == "seed_10");
  CHECK(runs[1].run_name == "seed_2");
  CHECK(runs[2].run_name == "single");
  CHECK(runs[2].mode == "td3");

  CHECK_THROWS_AS((void)collect_runs({(tree.root / "missing").string()}), IoError);
  fs::create_directories(tree.root / "empty");
  CHECK_THROWS_WITH_AS((void)collect_runs({(tree.root / "empty").string()}),
                       doctest::Contains("no runs"), IoError);
}

TEST_CASE("aggregate computes cross-run mean and population std") {
  // Two runs with final returns 1 and 3: mean 2, population std 1.
  const std::vector<RunMetrics> runs = {
      make_run("seed_1", "adinfohrl", {{100, 0.0}, {200, 1.0}}),
      make_run("seed_2", "adinfohrl", {{100, 0.5}, {200, 3.0}})};
  const std::string table = aggregate_report(runs);

  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  CHECK(line == "mode,step,runs,return_mean,return_std");
  std::getline(in, line);
  CHECK(line == "adinfohrl,100,2,0.25,0.25");
  std::getline(in, line);
  CHECK(line == "adinfohrl,200,2,2,1");
  std::getline(in, line);
  CHECK(line == "mode,runs,final_return_mean,final_return_std");
  std::getline(in, line);
  CHECK(line == "adinfohrl,2,2,1");
}

TEST_CASE("aggregate groups by mode in first-seen order") {
  const std::vector<RunMetrics> runs = {
      make_run("a", "td3", {{50, 1.0}}),
      make_run("b", "adinfohrl", {{50, 0.0}}),
      make_run("c", "td3", {{50, 2.0}})};
  const std::string table = aggregate_report(runs);

  std::istringstream in(table);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);
  CHECK(line == "td3,50,2,1.5,0.5");
  std::getline(in, line);
  CHECK(line == "adinfohrl,50,1,0,0");

  CHECK_THROWS_AS((void)aggregate_report({}), InsufficientData);
}

TEST_CASE("mismatched eval grids within a mode are rejected") {
  const std::vector<RunMetrics> length_mismatch = {
      make_run("a", "adinfohrl", {{100, 1.0}, {200, 1.0}}),
      make_run("b", "adinfohrl", {{100, 1.0}})};
  CHECK_THROWS_WITH_AS((void)aggregate_report(length_mismatch),
                       doctest::Contains("eval grids differ"), ConfigError);

  const std::vector<RunMetrics> step_mismatch = {
      make_run("a", "adinfohrl", {{100, 1.0}}),
      make_run("b", "adinfohrl", {{150, 1.0}})};
  CHECK_THROWS_AS((void)aggregate_report(step_mismatch), ConfigError);

  // Different modes may use different grids.
  const std::vector<RunMetrics> cross_mode = {
      make_run("a", "adinfohrl", {{100, 1.0}}),
      make_run("b", "td3", {{250, 1.0}})};
  CHECK_NOTHROW((void)aggregate_report(cross_mode));
}

TEST_CASE("end to end: directories written by hand aggregate cleanly") {
  TempTree tree;
  write_run(tree.root / "exp" / "seed_1", "adinfohrl", {{100, 1.0}});
  write_run(tree.root / "exp" / "seed_2", "adinfohrl", {{100, 3.0}});
  const std::string table =
      aggregate_report(collect_runs({(tree.root / "exp").string()}));
  CHECK(table.find("adinfohrl,100,2,2,1\n") != std::string::npos);
}

}  // TEST_SUITE
