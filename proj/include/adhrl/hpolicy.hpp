#pragma once

#include <span>
#include <vector>

#include "adhrl/critic.hpp"
#include "adhrl/ndmath.hpp"
#include "adhrl/rng.hpp"

namespace adhrl {

class OptionNet;

// Softmax distribution over options at a state, derived from the critic's
// value of each option's deterministic action. probs and option_values are
// index-aligned; argmax(probs) always equals argmax(option_values).
struct GatingDistribution {
  VectorXd probs;
  VectorXd option_values;
};

// One deterministic policy per option (tanh output scaled to the action
// bounds) plus target copies and per-option Adam state.
class OptionPolicySet {
 public:
  static OptionPolicySet init(int option_count, int state_dim, int action_dim,
                              const std::vector<int>& hidden_sizes,
                              const VectorXd& action_low, const VectorXd& action_high,
                              double lr, std::uint64_t seed);

  int option_count() const { return static_cast<int>(policies_.size()); }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const VectorXd& action_low() const { return low_; }
  const VectorXd& action_high() const { return high_; }

  VectorXd action(int option, const VectorXd& state) const;
  VectorXd target_action(int option, const VectorXd& state) const;

  // Q_min of each option's action; online or target side. The target side is
  // what the TD backup's option argmax runs on.
  VectorXd option_values(const TwinCritic& critic, const VectorXd& state,
                         bool use_targets) const;

  // One Adam ascent step per option o on (1/|S_o|) sum_{s in S_o} q1(s, mu_o(s)).
  // Options with no assigned samples are skipped and left bit-identical.
  void dpg_update(const TwinCritic& critic, const std::vector<VectorXd>& states,
                  std::span<const int> assignments);

  void soft_update_targets(double tau);

  DenseNet& policy(int o) { return policies_[o]; }
  const DenseNet& policy(int o) const { return policies_[o]; }
  DenseNet& target(int o) { return targets_[o]; }
  const DenseNet& target(int o) const { return targets_[o]; }
  AdamState& adam(int o) { return adam_[o]; }
  const AdamState& adam(int o) const { return adam_[o]; }

 private:
  VectorXd scale(const VectorXd& tanh_out) const;

  std::vector<DenseNet> policies_;
  std::vector<DenseNet> targets_;
  std::vector<AdamState> adam_;
  VectorXd low_, high_, mid_, half_;
  int state_dim_ = 0, action_dim_ = 0;
};

// softmax over online option values (max subtracted before exponentiation).
GatingDistribution compute_gating(const OptionPolicySet& policies,
                                  const TwinCritic& critic, const VectorXd& state);

int sample_option(const GatingDistribution& gating, Rng& rng);

// argmax option value under the online critic; ties go to the lowest index.
int greedy_option(const OptionPolicySet& policies, const TwinCritic& critic,
                  const VectorXd& state);

// V(s) = sum_o pi(o|s) Q(s, mu_o(s)) under the gating softmax.
double state_value(const OptionPolicySet& policies, const TwinCritic& critic,
                   const VectorXd& state);

// argmax of the option network's posterior per sample; ties to lowest index.
std::vector<int> assign_options(const OptionNet& onet,
                                const std::vector<VectorXd>& states,
                                const std::vector<VectorXd>& actions);

// Gradient of (1/N) sum_i q1(s_i, mu(s_i)) with respect to the policy
// parameters, including the tanh-to-bounds scaling. Exposed so tests can
// check the composed chain rule against finite differences.
GradientBundle dpg_gradient(const DenseNet& policy, const DenseNet& q1,
                            const std::vector<VectorXd>& states,
                            const VectorXd& action_low, const VectorXd& action_high);

}  // namespace adhrl
