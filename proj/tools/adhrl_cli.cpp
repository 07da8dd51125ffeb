// Experiment front end: train / eval / report subcommands over the adhrl
// library. All configuration flows through ExperimentConfig; the CLI only
// adds directory management and printing.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "adhrl/agent.hpp"
#include "adhrl/checkpoint.hpp"
#include "adhrl/config.hpp"
#include "adhrl/errors.hpp"
#include "adhrl/report.hpp"

namespace fs = std::filesystem;
using namespace adhrl;

namespace {

// --set KEY=VALUE arguments, in command-line order.
std::vector<std::pair<std::string, std::string>> split_overrides(
    const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects KEY=VALUE, got: " + s);
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

ExperimentConfig load_cli_config(
    const std::string& config_path,
    std::vector<std::pair<std::string, std::string>> overrides) {
  if (!config_path.empty())
    return ExperimentConfig::load_file(config_path, overrides);
  std::istringstream empty;
  return ExperimentConfig::load(empty, overrides);
}

int cmd_train(const ExperimentConfig& cfg, bool overwrite) {
  // Check every run directory up front so a sweep never half-starts.
  std::vector<std::string> run_dirs;
  for (int seed : cfg.seeds) {
    std::string dir = cfg.output_dir + "/seed_" + std::to_string(seed);
    if (fs::exists(dir)) {
      if (!overwrite)
        throw IoError("run directory exists (use --overwrite): " + dir);
      fs::remove_all(dir);
    }
    run_dirs.push_back(std::move(dir));
  }

  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const int seed = cfg.seeds[i];
    std::cout << "training seed " << seed << " -> " << run_dirs[i] << std::endl;
    TrainReport report = run_training(cfg, seed, run_dirs[i]);
    const auto& last = report.rows.back();
    std::cout << "  final eval return " << format_double(last.eval_return_mean)
              << " +/- " << format_double(last.eval_return_std) << '\n';
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, int episodes, int seed) {
  Agent agent = load_checkpoint(checkpoint_path);
  Rng rng(static_cast<std::uint64_t>(seed));
  EvalStats stats = agent.evaluate(episodes, rng);
  std::cout << "episodes " << episodes << '\n'
            << "return_mean " << format_double(stats.return_mean) << '\n'
            << "return_std " << format_double(stats.return_std) << '\n'
            << "terminal_fraction " << format_double(stats.terminal_fraction)
            << '\n';
  for (std::size_t o = 0; o < stats.option_usage.size(); ++o)
    std::cout << "option_usage_" << o << ' '
              << format_double(stats.option_usage[o]) << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& dirs, const std::string& out) {
  std::string table = aggregate_report(collect_runs(dirs));
  if (out.empty()) {
    std::cout << table;
  } else {
    std::ofstream f(out);
    if (!f) throw IoError("cannot write report file: " + out);
    f << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option-discovery reinforcement learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string seeds_list;
  std::string mode_name;
  bool overwrite = false;

  auto* train = app.add_subcommand("train", "Run one training run per seed");
  train->add_option("--config", config_path, "Config file (key = value lines)");
  train->add_option("--set", sets, "Override a config key, KEY=VALUE")
      ->take_all();
  train->add_option("--out", out_dir, "Output directory (holds seed_* runs)");
  train->add_option("--seeds", seeds_list, "Comma-separated seed list");
  train->add_option("--mode", mode_name, "adinfohrl, infohrl or td3");
  train->add_flag("--overwrite", overwrite, "Replace existing run directories");

  std::string checkpoint_path;
  int episodes = 10;
  int eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  eval->add_option("checkpoint", checkpoint_path, "Checkpoint file")
      ->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes");
  eval->add_option("--seed", eval_seed, "Evaluation rng seed");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Aggregate finished runs");
  report->add_option("dirs", report_dirs, "Run directories or sweep roots")
      ->required();
  report->add_option("--out", report_out, "Write the table here, not stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      auto overrides = split_overrides(sets);
      if (!mode_name.empty()) overrides.emplace_back("mode", mode_name);
      if (!seeds_list.empty()) overrides.emplace_back("seeds", seeds_list);
      if (!out_dir.empty()) overrides.emplace_back("output_dir", out_dir);
      return cmd_train(load_cli_config(config_path, std::move(overrides)),
                       overwrite);
    }
    if (eval->parsed()) return cmd_eval(checkpoint_path, episodes, eval_seed);
    if (report->parsed()) return cmd_report(report_dirs, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
