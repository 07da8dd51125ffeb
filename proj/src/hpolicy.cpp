#include "adhrl/hpolicy.hpp"

#include <cmath>

#include "adhrl/errors.hpp"
#include "adhrl/optionnet.hpp"

namespace adhrl {

namespace {

std::vector<int> policy_sizes(int state_dim, int action_dim,
                              const std::vector<int>& hidden) {
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(action_dim);
  return sizes;
}

std::vector<Activation> policy_acts(std::size_t hidden_count) {
  std::vector<Activation> acts(hidden_count, Activation::Relu);
  acts.push_back(Activation::Tanh);
  return acts;
}

}  // namespace

OptionPolicySet OptionPolicySet::init(int option_count, int state_dim, int action_dim,
                                      const std::vector<int>& hidden_sizes,
                                      const VectorXd& action_low,
                                      const VectorXd& action_high, double lr,
                                      std::uint64_t seed) {
  if (option_count < 1)
    throw ContractViolation("OptionPolicySet::init: need at least one option");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw ContractViolation("OptionPolicySet::init: bounds dimension mismatch");
  for (int d = 0; d < action_dim; ++d)
    if (!(action_low[d] < action_high[d]))
      throw ContractViolation("OptionPolicySet::init: bounds must satisfy low < high");

  OptionPolicySet set;
  set.state_dim_ = state_dim;
  set.action_dim_ = action_dim;
  set.low_ = action_low;
  set.high_ = action_high;
  set.mid_ = 0.5 * (action_low + action_high);
  set.half_ = 0.5 * (action_high - action_low);

  const auto sizes = policy_sizes(state_dim, action_dim, hidden_sizes);
  const auto acts = policy_acts(hidden_sizes.size());
  for (int o = 0; o < option_count; ++o) {
    set.policies_.push_back(net_init(sizes, acts, Rng::mix(seed, 100 + o)));
    set.targets_.push_back(set.policies_.back());  // exact copy
    set.adam_.push_back(AdamState::init(set.policies_.back(), lr));
  }
  return set;
}

VectorXd OptionPolicySet::scale(const VectorXd& tanh_out) const {
  return mid_ + half_.cwiseProduct(tanh_out);
}

VectorXd OptionPolicySet::action(int option, const VectorXd& state) const {
  if (option < 0 || option >= option_count())
    throw ContractViolation("OptionPolicySet::action: option out of range");
  return scale(forward(policies_[option], state));
}

VectorXd OptionPolicySet::target_action(int option, const VectorXd& state) const {
  if (option < 0 || option >= option_count())
    throw ContractViolation("OptionPolicySet::target_action: option out of range");
  return scale(forward(targets_[option], state));
}

VectorXd OptionPolicySet::option_values(const TwinCritic& critic, const VectorXd& state,
                                        bool use_targets) const {
  VectorXd values(option_count());
  for (int o = 0; o < option_count(); ++o) {
    const VectorXd a = use_targets ? target_action(o, state) : action(o, state);
    values[o] = critic.value(state, a, use_targets ? QHead::MinTarget : QHead::Min);
  }
  return values;
}

void OptionPolicySet::dpg_update(const TwinCritic& critic,
                                 const std::vector<VectorXd>& states,
                                 std::span<const int> assignments) {
  if (states.size() != assignments.size())
    throw ContractViolation("dpg_update: states/assignments size mismatch");

  std::vector<std::vector<VectorXd>> grouped(option_count());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const int o = assignments[i];
    if (o < 0 || o >= option_count())
      throw ContractViolation("dpg_update: assignment out of range");
    grouped[o].push_back(states[i]);
  }

  for (int o = 0; o < option_count(); ++o) {
    if (grouped[o].empty()) continue;  // skipped this round, params untouched
    const GradientBundle g = dpg_gradient(policies_[o], critic.q1, grouped[o], low_, high_);
    adam_step(adam_[o], policies_[o], g, /*ascend=*/true);
  }
}

void OptionPolicySet::soft_update_targets(double tau) {
  for (int o = 0; o < option_count(); ++o)
    targets_[o] = soft_update(targets_[o], policies_[o], tau);
}

GatingDistribution compute_gating(const OptionPolicySet& policies,
                                  const TwinCritic& critic, const VectorXd& state) {
  GatingDistribution g;
  g.option_values = policies.option_values(critic, state, false);
  const double m = g.option_values.maxCoeff();
  VectorXd e = (g.option_values.array() - m).exp().matrix();
  g.probs = e / e.sum();
  return g;
}

int sample_option(const GatingDistribution& gating, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = static_cast<int>(gating.probs.size());
  for (int o = 0; o < n; ++o) {
    acc += gating.probs[o];
    if (u < acc) return o;
  }
  return n - 1;  // guard against accumulated rounding at u ~ 1
}

int greedy_option(const OptionPolicySet& policies, const TwinCritic& critic,
                  const VectorXd& state) {
  const VectorXd values = policies.option_values(critic, state, false);
  int best = 0;
  for (int o = 1; o < values.size(); ++o)
    if (values[o] > values[best]) best = o;
  return best;
}

double state_value(const OptionPolicySet& policies, const TwinCritic& critic,
                   const VectorXd& state) {
  const GatingDistribution g = compute_gating(policies, critic, state);
  return g.probs.dot(g.option_values);
}

std::vector<int> assign_options(const OptionNet& onet,
                                const std::vector<VectorXd>& states,
                                const std::vector<VectorXd>& actions) {
  if (states.size() != actions.size())
    throw ContractViolation("assign_options: states/actions size mismatch");
  std::vector<int> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const VectorXd p = onet.posterior(states[i], actions[i]);
    int best = 0;
    for (int o = 1; o < p.size(); ++o)
      if (p[o] > p[best]) best = o;
    out.push_back(best);
  }
  return out;
}

GradientBundle dpg_gradient(const DenseNet& policy, const DenseNet& q1,
                            const std::vector<VectorXd>& states,
                            const VectorXd& action_low, const VectorXd& action_high) {
  if (states.empty()) throw InsufficientData("dpg_gradient: no states");
  const VectorXd mid = 0.5 * (action_low + action_high);
  const VectorXd half = 0.5 * (action_high - action_low);
  const double n = static_cast<double>(states.size());
  const int state_dim = static_cast<int>(states.front().size());

  GradientBundle acc = GradientBundle::zeros_like(policy);
  for (const VectorXd& s : states) {
    const VectorXd t = forward(policy, s);          // tanh output in [-1,1]
    const VectorXd a = mid + half.cwiseProduct(t);  // scaled action
    VectorXd x(s.size() + a.size());
    x << s, a;
    VectorXd cot = VectorXd::Zero(1);
    cot[0] = 1.0;
    const GradientBundle qg = backward(q1, x, cot);
    // dQ/da through the affine bound scaling, then through the policy net.
    const VectorXd da = qg.input_grad.segment(state_dim, a.size());
    acc.add(backward(policy, s, half.cwiseProduct(da)));
  }
  acc.scale(1.0 / n);
  return acc;
}

}  // namespace adhrl
