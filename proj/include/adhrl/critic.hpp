#pragma once

#include <span>
#include <utility>
#include <vector>

#include "adhrl/buffers.hpp"
#include "adhrl/ndmath.hpp"

namespace adhrl {

class OptionPolicySet;

enum class QHead { Q1, Q2, Min, MinTarget };

// Twin Q networks over concatenated (state, action) with Polyak-averaged
// target copies. Targets start as exact copies of the online nets.
struct TwinCritic {
  DenseNet q1, q2, q1_target, q2_target;
  AdamState adam1, adam2;
  int state_dim = 0;
  int action_dim = 0;

  static TwinCritic init(int state_dim, int action_dim,
                         const std::vector<int>& hidden_sizes, double lr,
                         std::uint64_t seed);

  double value(const VectorXd& state, const VectorXd& action, QHead head) const;
};

// Clipped double-Q targets with target-policy smoothing:
//   y = r + gamma * (1 - terminal) * min_target(s', a')
//   a' = clip(mu_target(s') + clip(eps, -noise_clip, noise_clip), bounds)
// where the target action's option is the argmax of the target-critic option
// values under the target policies. Smoothing noise is drawn from `rng` one
// normal per action dimension, batch elements in order, so callers can
// reproduce the draw stream exactly.
std::vector<double> compute_td_target(const TwinCritic& critic,
                                      std::span<const Transition> batch,
                                      const OptionPolicySet& policies,
                                      double gamma, double noise_sigma,
                                      double noise_clip, Rng& rng);

// One Adam step per twin on the mean squared error against shared targets.
// Returns the two losses evaluated before the step.
std::pair<double, double> critic_update(TwinCritic& critic,
                                        std::span<const Transition> batch,
                                        std::span<const double> targets);

}  // namespace adhrl
