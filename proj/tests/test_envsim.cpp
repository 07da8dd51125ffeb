#include <doctest.h>

#include <cmath>

#include "adhrl/envsim.hpp"
#include "adhrl/errors.hpp"

using namespace adhrl;

TEST_SUITE("envsim") {

TEST_CASE("bandit spec and reward shape") {
  EnvParams params;
  BimodalBandit env(params);
  CHECK(env.spec().name == "bimodal-bandit");
  CHECK(env.spec().state_dim == 1);
  CHECK(env.spec().action_dim == 1);
  CHECK(env.spec().action_low[0] == -1.0);
  CHECK(env.spec().action_high[0] == 1.0);
  CHECK(env.spec().max_episode_steps == 1);

  CHECK(env.reward_at(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(env.reward_at(-0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(env.reward_at(0.0) ==
        doctest::Approx(2.0 * std::exp(-12.5)).epsilon(1e-12));
  CHECK(env.reward_at(0.0) == doctest::Approx(7.4533e-06).epsilon(1e-4));
}

TEST_CASE("bandit reward is symmetric with two global maxima") {
  EnvParams params;
  BimodalBandit env(params);
  double best = -1.0;
  for (int i = -1000; i <= 1000; ++i) {
    const double a = i * 1e-3;
    CHECK(env.reward_at(a) == doctest::Approx(env.reward_at(-a)).epsilon(1e-12));
    best = std::max(best, env.reward_at(a));
  }
  // Both peaks attain the grid maximum; nothing comes close elsewhere.
  CHECK(env.reward_at(0.5) == doctest::Approx(best).epsilon(1e-12));
  CHECK(env.reward_at(-0.5) == doctest::Approx(best).epsilon(1e-12));
  for (int i = -1000; i <= 1000; ++i) {
    const double a = i * 1e-3;
    if (std::abs(std::abs(a) - 0.5) > 0.05)
      CHECK(env.reward_at(a) < best - 1e-3);
  }
}

TEST_CASE("bandit episodes are single terminal steps") {
  EnvParams params;
  BimodalBandit env(params);
  Rng rng(3);
  const VectorXd s = env.reset(rng);
  CHECK(s.size() == 1);
  CHECK(s[0] == 0.0);

  VectorXd a(1);
  a << 0.5;
  const StepResult res = env.step(a);
  CHECK(res.terminal);
  CHECK_FALSE(res.truncated);
  CHECK(res.reward == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.next_state[0] == 0.0);

  // A second step without reset violates the episode protocol.
  CHECK_THROWS_AS((void)env.step(a), ContractViolation);
}

TEST_CASE("bandit clips actions to bounds before scoring") {
  EnvParams params;
  BimodalBandit env(params);
  Rng rng(4);
  (void)env.reset(rng);
  VectorXd wild(1);
  wild << 2.0;
  const StepResult res = env.step(wild);
  CHECK(res.reward == doctest::Approx(env.reward_at(1.0)).epsilon(1e-15));
}

TEST_CASE("bandit rejects malformed actions") {
  EnvParams params;
  BimodalBandit env(params);
  Rng rng(4);
  (void)env.reset(rng);
  VectorXd wrong_dim(2);
  wrong_dim << 0.1, 0.2;
  CHECK_THROWS_AS((void)env.step(wrong_dim), ContractViolation);
  VectorXd bad(1);
  bad << std::nan("");
  CHECK_THROWS_AS((void)env.step(bad), NumericalError);
}

TEST_CASE("bandit probe states are the constant state") {
  EnvParams params;
  BimodalBandit env(params);
  Rng rng(5);
  CHECK(env.sample_state(rng)[0] == 0.0);
}

TEST_CASE("pointmass spec, goals, and reset distribution") {
  EnvParams params;
  TwoGoalPointMass env(params);
  CHECK(env.spec().name == "two-goal-pointmass");
  CHECK(env.spec().state_dim == 2);
  CHECK(env.spec().action_dim == 2);
  CHECK(env.spec().max_episode_steps == 100);
  // The action space is the velocity itself.
  CHECK(env.spec().action_low[0] == -params.pointmass_max_speed);
  CHECK(env.spec().action_high[1] == params.pointmass_max_speed);
  CHECK(env.goal(0)[0] == doctest::Approx(0.8));
  CHECK(env.goal(1)[0] == doctest::Approx(-0.8));
  CHECK(env.goal(0)[1] == doctest::Approx(0.8));
  CHECK(env.goal(1)[1] == doctest::Approx(0.8));

  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const VectorXd s = env.reset(rng);
    CHECK(std::abs(s[0]) <= params.pointmass_init_range);
    CHECK(std::abs(s[1]) <= params.pointmass_init_range);
  }
}

TEST_CASE("pointmass integrates clipped velocities and walls the position") {
  EnvParams params;
  TwoGoalPointMass env(params);
  Rng rng(7);
  VectorXd s = env.reset(rng);

  VectorXd a(2);
  a << 0.07, -0.03;
  StepResult res = env.step(a);
  CHECK(res.next_state[0] == doctest::Approx(s[0] + 0.07).epsilon(1e-12));
  CHECK(res.next_state[1] == doctest::Approx(s[1] - 0.03).epsilon(1e-12));
  CHECK(res.reward == doctest::Approx(params.pointmass_step_reward));
  CHECK_FALSE(res.terminal);

  // Oversized commands saturate at max_speed per axis.
  s = res.next_state;
  VectorXd big(2);
  big << 5.0, -5.0;
  res = env.step(big);
  CHECK(res.next_state[0] ==
        doctest::Approx(s[0] + params.pointmass_max_speed).epsilon(1e-12));
  CHECK(res.next_state[1] ==
        doctest::Approx(s[1] - params.pointmass_max_speed).epsilon(1e-12));

  // Drive into the wall; position saturates at the bound.
  VectorXd down(2);
  down << 0.0, -1.0;
  StepResult last{};
  (void)env.reset(rng);
  for (int i = 0; i < 40; ++i) last = env.step(down);
  CHECK(last.next_state[1] == -1.0);
}

TEST_CASE("pointmass pays 1 and terminates inside a goal disk") {
  EnvParams params;
  params.pointmass_init_range = 0.0;  // start exactly at the origin
  TwoGoalPointMass env(params);
  Rng rng(8);
  (void)env.reset(rng);
  VectorXd toward(2);
  toward << 0.1, 0.1;
  StepResult res{};
  int steps = 0;
  do {
    res = env.step(toward);
    ++steps;
    REQUIRE(steps < 100);
  } while (!res.terminal);
  CHECK(steps == 8);  // (0.8, 0.8) is the first point within radius 0.1 of a goal
  CHECK(res.reward == 1.0);
  CHECK((res.next_state - env.goal(0)).norm() <=
        params.pointmass_goal_radius + 1e-12);
}

TEST_CASE("pointmass truncates at the horizon without terminal") {
  EnvParams params;
  TwoGoalPointMass env(params);
  Rng rng(9);
  (void)env.reset(rng);
  VectorXd idle = VectorXd::Zero(2);
  StepResult res{};
  for (int i = 0; i < 100; ++i) {
    res = env.step(idle);
    if (i < 99) {
      REQUIRE_FALSE(res.terminal);
      REQUIRE_FALSE(res.truncated);
    }
  }
  CHECK(res.truncated);
  CHECK_FALSE(res.terminal);
  CHECK_THROWS_AS((void)env.step(idle), ContractViolation);
}

TEST_CASE("horizon override applies") {
  EnvParams params;
  params.max_episode_steps_override = 7;
  TwoGoalPointMass env(params);
  CHECK(env.spec().max_episode_steps == 7);
  Rng rng(10);
  (void)env.reset(rng);
  VectorXd idle = VectorXd::Zero(2);
  StepResult res{};
  for (int i = 0; i < 7; ++i) res = env.step(idle);
  CHECK(res.truncated);
}

TEST_CASE("make_env resolves names and rejects unknowns") {
  EnvParams params;
  CHECK(make_env("bimodal-bandit", params)->spec().state_dim == 1);
  CHECK(make_env("two-goal-pointmass", params)->spec().state_dim == 2);
  CHECK_THROWS_AS((void)make_env("walker2d", params), ConfigError);
}

}  // TEST_SUITE
