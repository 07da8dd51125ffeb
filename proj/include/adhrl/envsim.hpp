#pragma once

#include <memory>
#include <string>

#include "adhrl/ndmath.hpp"
#include "adhrl/rng.hpp"

namespace adhrl {

struct EnvSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  VectorXd action_low;
  VectorXd action_high;
  int max_episode_steps = 0;
};

struct StepResult {
  VectorXd next_state;
  double reward = 0.0;
  bool terminal = false;   // task-level end; the critic does not bootstrap past it
  bool truncated = false;  // episode hit the horizon; bootstrapping continues
};

// Task knobs exposed through the experiment config.
struct EnvParams {
  int max_episode_steps_override = 0;  // 0 keeps the task default

  double bandit_mode_center = 0.5;
  double bandit_mode_width = 0.02;

  double pointmass_goal_x = 0.8;
  double pointmass_goal_y = 0.8;
  double pointmass_goal_radius = 0.1;
  double pointmass_step_reward = -0.01;
  double pointmass_max_speed = 0.1;
  double pointmass_init_range = 0.1;
};

class Environment {
 public:
  virtual ~Environment() = default;
  const EnvSpec& spec() const { return spec_; }
  virtual VectorXd reset(Rng& rng) = 0;
  // Actions are clipped to the bounds before the dynamics run.
  virtual StepResult step(const VectorXd& action) = 0;
  // Draws from the task's reachable state support; used for probe metrics.
  virtual VectorXd sample_state(Rng& rng) const = 0;

 protected:
  EnvSpec spec_;
  int episode_steps_ = 0;
};

// One-step task whose reward over the 1-D action has two equal peaks at
// +-mode_center. The state is a constant [0]; the whole difficulty lives in
// the action's multi-modality.
class BimodalBandit : public Environment {
 public:
  explicit BimodalBandit(const EnvParams& params);
  VectorXd reset(Rng& rng) override;
  StepResult step(const VectorXd& action) override;
  VectorXd sample_state(Rng& rng) const override;
  double reward_at(double action) const;

 private:
  double center_;
  double width_;
  bool awaiting_reset_ = true;
};

// Velocity-controlled point in [-1,1]^2 with two symmetric goals. Reaching
// either goal pays 1 and ends the episode; every other step costs a small
// penalty.
class TwoGoalPointMass : public Environment {
 public:
  explicit TwoGoalPointMass(const EnvParams& params);
  VectorXd reset(Rng& rng) override;
  StepResult step(const VectorXd& action) override;
  VectorXd sample_state(Rng& rng) const override;
  VectorXd goal(int which) const;  // which in {0, 1}

 private:
  EnvParams p_;
  VectorXd pos_;
  bool awaiting_reset_ = true;
};

// Known names: "bimodal-bandit", "two-goal-pointmass".
std::unique_ptr<Environment> make_env(const std::string& name,
                                      const EnvParams& params);

}  // namespace adhrl
