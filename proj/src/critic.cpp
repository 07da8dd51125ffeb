#include "adhrl/critic.hpp"

#include <algorithm>
#include <cmath>

#include "adhrl/errors.hpp"
#include "adhrl/hpolicy.hpp"

namespace adhrl {

namespace {

std::vector<int> critic_sizes(int state_dim, int action_dim,
                              const std::vector<int>& hidden) {
  std::vector<int> sizes;
  sizes.push_back(state_dim + action_dim);
  for (int h : hidden) sizes.push_back(h);
  sizes.push_back(1);
  return sizes;
}

std::vector<Activation> critic_acts(std::size_t hidden_count) {
  std::vector<Activation> acts(hidden_count, Activation::Relu);
  acts.push_back(Activation::Identity);
  return acts;
}

VectorXd concat(const VectorXd& s, const VectorXd& a) {
  VectorXd x(s.size() + a.size());
  x << s, a;
  return x;
}

}  // namespace

TwinCritic TwinCritic::init(int state_dim, int action_dim,
                            const std::vector<int>& hidden_sizes, double lr,
                            std::uint64_t seed) {
  if (state_dim < 1 || action_dim < 1)
    throw ContractViolation("TwinCritic::init: dimensions must be positive");
  TwinCritic c;
  c.state_dim = state_dim;
  c.action_dim = action_dim;
  const auto sizes = critic_sizes(state_dim, action_dim, hidden_sizes);
  const auto acts = critic_acts(hidden_sizes.size());
  c.q1 = net_init(sizes, acts, Rng::mix(seed, 1));
  c.q2 = net_init(sizes, acts, Rng::mix(seed, 2));
  c.q1_target = c.q1;  // exact copies at construction
  c.q2_target = c.q2;
  c.adam1 = AdamState::init(c.q1, lr);
  c.adam2 = AdamState::init(c.q2, lr);
  return c;
}

double TwinCritic::value(const VectorXd& state, const VectorXd& action,
                         QHead head) const {
  const VectorXd x = concat(state, action);
  switch (head) {
    case QHead::Q1: return forward(q1, x)[0];
    case QHead::Q2: return forward(q2, x)[0];
    case QHead::Min: return std::min(forward(q1, x)[0], forward(q2, x)[0]);
    case QHead::MinTarget:
      return std::min(forward(q1_target, x)[0], forward(q2_target, x)[0]);
  }
  throw ContractViolation("TwinCritic::value: unknown head");
}

std::vector<double> compute_td_target(const TwinCritic& critic,
                                      std::span<const Transition> batch,
                                      const OptionPolicySet& policies,
                                      double gamma, double noise_sigma,
                                      double noise_clip, Rng& rng) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  const VectorXd& low = policies.action_low();
  const VectorXd& high = policies.action_high();

  for (const Transition& t : batch) {
    if (t.terminal) {
      // No bootstrap past a task terminal, but the rng stream still advances
      // uniformly so targets for other batch elements are draw-for-draw
      // reproducible regardless of terminal placement.
      for (int d = 0; d < policies.action_dim(); ++d) rng.normal();
      targets.push_back(t.reward);
      continue;
    }
    const VectorXd values = policies.option_values(critic, t.next_state, true);
    int best = 0;
    for (int o = 1; o < values.size(); ++o)
      if (values[o] > values[best]) best = o;

    VectorXd a = policies.target_action(best, t.next_state);
    for (int d = 0; d < a.size(); ++d) {
      const double eps = rng.normal(0.0, noise_sigma);
      a[d] += std::clamp(eps, -noise_clip, noise_clip);
      a[d] = std::clamp(a[d], low[d], high[d]);
    }
    targets.push_back(t.reward + gamma * critic.value(t.next_state, a, QHead::MinTarget));
  }
  return targets;
}

std::pair<double, double> critic_update(TwinCritic& critic,
                                        std::span<const Transition> batch,
                                        std::span<const double> targets) {
  if (batch.empty()) throw InsufficientData("critic_update: empty batch");
  if (batch.size() != targets.size())
    throw ContractViolation("critic_update: batch/target size mismatch");
  const double n = static_cast<double>(batch.size());

  double loss1 = 0.0, loss2 = 0.0;
  GradientBundle g1 = GradientBundle::zeros_like(critic.q1);
  GradientBundle g2 = GradientBundle::zeros_like(critic.q2);
  VectorXd cot(1);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const VectorXd x = concat(batch[i].state, batch[i].action);
    const double y = targets[i];
    if (!std::isfinite(y)) throw NumericalError("critic_update: non-finite target");

    const double r1 = forward(critic.q1, x)[0] - y;
    loss1 += r1 * r1;
    cot[0] = 2.0 * r1 / n;
    g1.add(backward(critic.q1, x, cot));

    const double r2 = forward(critic.q2, x)[0] - y;
    loss2 += r2 * r2;
    cot[0] = 2.0 * r2 / n;
    g2.add(backward(critic.q2, x, cot));
  }
  loss1 /= n;
  loss2 /= n;

  adam_step(critic.adam1, critic.q1, g1);
  adam_step(critic.adam2, critic.q2, g2);
  return {loss1, loss2};
}

}  // namespace adhrl
