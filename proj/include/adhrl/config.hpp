#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "adhrl/envsim.hpp"

namespace adhrl {

enum class Mode { AdInfoHrl, InfoHrl, Td3 };

Mode mode_from_string(const std::string& name);
std::string to_string(Mode m);

// Flat key=value experiment configuration. Defaults are the desk-scale run;
// validate() enforces the invariants and resolve() fills derived fields
// (actor batch, td3 forcing a single option).
struct ExperimentConfig {
  std::string env_name = "bimodal-bandit";
  Mode mode = Mode::AdInfoHrl;

  int option_count = 2;
  int option_hold = 3;

  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 0.001;
  double critic_lr = 0.001;
  double option_lr = 0.001;

  int critic_batch = 100;
  int actor_batch_total = 0;  // 0 resolves to 100 * option_count
  int option_batch = 50;
  int on_policy_capacity = 5000;
  int option_epochs = 40;

  double lambda_mi = 0.1;
  double vat_noise_variance = 0.04;

  double exploration_sigma = 0.1;
  double target_noise_sigma = 0.2;
  double noise_clip = 0.5;
  int policy_delay = 2;

  std::vector<int> hidden_sizes = {64, 64};
  long long replay_capacity = 1000000;
  int warmup_steps = 1000;

  long long total_steps = 20000;
  int eval_interval = 5000;
  int eval_episodes = 10;

  std::vector<int> seeds = {1};
  std::string output_dir = "runs";

  EnvParams env;

  // Parses `key = value` lines ('#' starts a comment), applies overrides in
  // order, then resolves and validates. Unknown keys are rejected.
  static ExperimentConfig load(
      std::istream& in,
      const std::vector<std::pair<std::string, std::string>>& overrides = {});
  static ExperimentConfig load_file(
      const std::string& path,
      const std::vector<std::pair<std::string, std::string>>& overrides = {});

  void set_key(const std::string& key, const std::string& value);
  void resolve();         // fills derived defaults; td3 forces option_count = 1
  void validate() const;  // throws ConfigError naming the offending key

  // Canonical echo of the resolved config; load(echo()) reproduces every field.
  std::string echo() const;
};

}  // namespace adhrl
