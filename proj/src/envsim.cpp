#include "adhrl/envsim.hpp"

#include <cmath>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

VectorXd clip(const VectorXd& v, const VectorXd& lo, const VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

void check_action(const VectorXd& a, const EnvSpec& spec) {
  if (a.size() != spec.action_dim)
    throw ContractViolation(spec.name + ": action dimension mismatch");
  if (!a.allFinite())
    throw NumericalError(spec.name + ": non-finite action");
}

}  // namespace

BimodalBandit::BimodalBandit(const EnvParams& params)
    : center_(params.bandit_mode_center), width_(params.bandit_mode_width) {
  if (width_ <= 0.0) throw ConfigError("bimodal-bandit: mode width must be positive");
  spec_.name = "bimodal-bandit";
  spec_.state_dim = 1;
  spec_.action_dim = 1;
  spec_.action_low = VectorXd::Constant(1, -1.0);
  spec_.action_high = VectorXd::Constant(1, 1.0);
  spec_.max_episode_steps =
      params.max_episode_steps_override > 0 ? params.max_episode_steps_override : 1;
}

VectorXd BimodalBandit::reset(Rng&) {
  episode_steps_ = 0;
  awaiting_reset_ = false;
  return VectorXd::Zero(1);
}

double BimodalBandit::reward_at(double a) const {
  const double d1 = a - center_;
  const double d2 = a + center_;
  return std::exp(-d1 * d1 / width_) + std::exp(-d2 * d2 / width_);
}

StepResult BimodalBandit::step(const VectorXd& action) {
  if (awaiting_reset_) throw ContractViolation("bimodal-bandit: step before reset");
  check_action(action, spec_);
  const double a = std::min(std::max(action[0], -1.0), 1.0);
  episode_steps_ += 1;
  StepResult r;
  r.next_state = VectorXd::Zero(1);
  r.reward = reward_at(a);
  // The single step is a true task end, not a horizon cutoff.
  r.terminal = true;
  r.truncated = false;
  awaiting_reset_ = true;
  return r;
}

VectorXd BimodalBandit::sample_state(Rng&) const { return VectorXd::Zero(1); }

TwoGoalPointMass::TwoGoalPointMass(const EnvParams& params) : p_(params) {
  if (p_.pointmass_goal_radius <= 0.0)
    throw ConfigError("two-goal-pointmass: goal radius must be positive");
  if (p_.pointmass_max_speed <= 0.0)
    throw ConfigError("two-goal-pointmass: max speed must be positive");
  spec_.name = "two-goal-pointmass";
  spec_.state_dim = 2;
  spec_.action_dim = 2;
  spec_.action_low = VectorXd::Constant(2, -p_.pointmass_max_speed);
  spec_.action_high = VectorXd::Constant(2, p_.pointmass_max_speed);
  spec_.max_episode_steps =
      params.max_episode_steps_override > 0 ? params.max_episode_steps_override : 100;
  pos_ = VectorXd::Zero(2);
}

VectorXd TwoGoalPointMass::goal(int which) const {
  VectorXd g(2);
  g << (which == 0 ? p_.pointmass_goal_x : -p_.pointmass_goal_x), p_.pointmass_goal_y;
  return g;
}

VectorXd TwoGoalPointMass::reset(Rng& rng) {
  episode_steps_ = 0;
  awaiting_reset_ = false;
  const double r = p_.pointmass_init_range;
  pos_ = VectorXd(2);
  pos_ << rng.uniform(-r, r), rng.uniform(-r, r);
  return pos_;
}

StepResult TwoGoalPointMass::step(const VectorXd& action) {
  if (awaiting_reset_) throw ContractViolation("two-goal-pointmass: step before reset");
  check_action(action, spec_);
  const VectorXd a = clip(action, spec_.action_low, spec_.action_high);
  pos_ = clip(pos_ + a, VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 1.0));
  episode_steps_ += 1;

  StepResult r;
  r.next_state = pos_;
  const bool at_goal = (pos_ - goal(0)).norm() <= p_.pointmass_goal_radius ||
                       (pos_ - goal(1)).norm() <= p_.pointmass_goal_radius;
  if (at_goal) {
    r.reward = 1.0;
    r.terminal = true;
    r.truncated = false;
  } else {
    r.reward = p_.pointmass_step_reward;
    r.terminal = false;
    r.truncated = episode_steps_ >= spec_.max_episode_steps;
  }
  if (r.terminal || r.truncated) awaiting_reset_ = true;
  return r;
}

VectorXd TwoGoalPointMass::sample_state(Rng& rng) const {
  VectorXd s(2);
  s << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
  return s;
}

std::unique_ptr<Environment> make_env(const std::string& name,
                                      const EnvParams& params) {
  if (name == "bimodal-bandit") return std::make_unique<BimodalBandit>(params);
  if (name == "two-goal-pointmass") return std::make_unique<TwoGoalPointMass>(params);
  throw ConfigError("unknown environment: " + name);
}

}  // namespace adhrl
