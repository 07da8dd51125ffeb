#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adhrl/buffers.hpp"
#include "adhrl/config.hpp"
#include "adhrl/critic.hpp"
#include "adhrl/envsim.hpp"
#include "adhrl/hpolicy.hpp"
#include "adhrl/optionnet.hpp"

namespace adhrl {

// Log density of one clipped-Gaussian noise coordinate: Gaussian pdf strictly
// inside (-clip, clip), the tail mass log P(|eps_raw| >= clip) at the clip
// boundary. sigma <= 0 denotes deterministic noise with log density 0.
double clipped_gaussian_log_density(double eps, double sigma, double clip);

struct EvalStats {
  double return_mean = 0.0;
  double return_std = 0.0;  // population (N divisor) across episodes
  std::vector<double> episode_returns;
  double terminal_fraction = 0.0;  // episodes ended by the task, not the horizon
  std::vector<double> option_usage;
};

struct MetricsRow {
  long long step = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double critic_loss_1 = 0.0;
  double critic_loss_2 = 0.0;
  double option_loss = 0.0;
  double mi_estimate = 0.0;
  std::vector<double> option_usage;  // behavior-policy usage over the interval
  double option_action_separation = 0.0;
};

struct TrainReport {
  int option_count = 0;
  std::vector<MetricsRow> rows;
  std::string to_csv() const;
};

std::vector<MetricsRow> parse_metrics_csv(std::istream& in);

// One training run: environment interaction, twin-critic TD learning with
// delayed policy/target updates, and periodic option-network rounds when the
// on-policy buffer fills. All randomness flows through four named streams so
// identically seeded agents are bit-identical.
class Agent {
 public:
  Agent(const ExperimentConfig& cfg, int seed);

  struct ActResult {
    VectorXd action;
    int option = 0;
    double log_density = 0.0;
  };

  // Behavior policy. Options are redrawn from the gating softmax at hold
  // boundaries (and episode starts); the action is the option's deterministic
  // action plus clipped Gaussian noise, clipped again to the action bounds.
  ActResult act_explore(const VectorXd& state);

  // Exactly one environment step plus whatever updates the schedule owes:
  // one critic update per step after warm-up, policy/target updates every
  // policy_delay critic updates, an option-network round when the on-policy
  // buffer fills (then cleared). During warm-up actions are uniform.
  void train_step();

  // Episodes with zero action noise and greedy option choice.
  EvalStats evaluate(int episodes, Rng& rng) const;

  // Mean pairwise distance between option actions on the fixed probe states.
  double option_action_separation() const;

  const ExperimentConfig& config() const { return cfg_; }
  int seed() const { return seed_; }
  long long step_count() const { return step_count_; }
  long long critic_update_count() const { return critic_updates_; }
  const TwinCritic& critic() const { return critic_; }
  TwinCritic& critic() { return critic_; }
  const OptionPolicySet& policies() const { return policies_; }
  OptionPolicySet& policies() { return policies_; }
  const OptionNet& option_net() const { return onet_; }
  const ReplayBuffer& replay() const { return replay_; }
  const OnPolicyBuffer& on_policy() const { return on_policy_; }
  const std::vector<long long>& option_train_steps() const { return option_train_steps_; }
  int current_option() const { return current_option_; }
  long long warmup_threshold() const;

  // Interval metric accumulators, consumed by run_training.
  struct IntervalStats {
    double critic_loss_1 = 0.0;
    double critic_loss_2 = 0.0;
    std::vector<double> option_usage;
  };
  IntervalStats flush_interval_stats();
  double last_option_loss() const { return last_option_loss_; }
  double last_mi_estimate() const { return last_mi_; }

 private:
  friend void save_checkpoint_stream(std::ostream&, const Agent&);
  friend Agent load_checkpoint_stream(std::istream&);

  void maybe_redraw_option(const VectorXd& state);
  ActResult act_warmup(const VectorXd& state);

  ExperimentConfig cfg_;
  int seed_ = 0;
  std::unique_ptr<Environment> env_;
  TwinCritic critic_;
  OptionPolicySet policies_;
  OptionNet onet_;
  ReplayBuffer replay_;
  OnPolicyBuffer on_policy_;

  Rng rng_env_, rng_explore_, rng_batch_, rng_optnoise_;
  std::vector<VectorXd> probe_states_;

  VectorXd current_state_;
  bool need_reset_ = true;
  int current_option_ = 0;
  int steps_since_option_draw_ = 0;
  long long step_count_ = 0;
  long long critic_updates_ = 0;

  double last_option_loss_ = 0.0;
  double last_mi_ = 0.0;
  std::vector<long long> option_train_steps_;

  // interval accumulators
  double interval_loss1_ = 0.0, interval_loss2_ = 0.0;
  long long interval_updates_ = 0;
  std::vector<long long> interval_usage_;
  long long interval_steps_ = 0;
};

// Runs total_steps of training with an evaluation every eval_interval steps.
// When out_dir is given, writes metrics.csv, config.txt and checkpoints there;
// a numerical abort saves a diagnostic checkpoint before rethrowing.
TrainReport run_training(const ExperimentConfig& cfg, int seed,
                         const std::optional<std::string>& out_dir = std::nullopt);

}  // namespace adhrl
