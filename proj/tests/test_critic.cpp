#include <doctest.h>

#include <cmath>
#include <vector>

#include "adhrl/critic.hpp"
#include "adhrl/errors.hpp"
#include "adhrl/hpolicy.hpp"
#include "support.hpp"

using namespace adhrl;
using testsupport::wire_single;

namespace {

VectorXd vec1(double x) { return VectorXd::Constant(1, x); }

Transition make_t(const VectorXd& s, const VectorXd& a, double r,
                  const VectorXd& s2, bool terminal) {
  Transition t;
  t.state = s;
  t.action = a;
  t.reward = r;
  t.next_state = s2;
  t.terminal = terminal;
  return t;
}

// Critic whose twins share a hand-wired single layer; target copies can then
// be overwritten independently of the online side.
TwinCritic wired_critic(int state_dim, int action_dim, const MatrixXd& W,
                        const VectorXd& b) {
  TwinCritic c = TwinCritic::init(state_dim, action_dim, {}, 1e-3, 99);
  c.q1 = wire_single(state_dim + action_dim, 1, Activation::Identity, W, b);
  c.q2 = c.q1;
  c.q1_target = c.q1;
  c.q2_target = c.q1;
  return c;
}

// Single-layer tanh policies over 1-D state/action producing fixed target
// actions tanh(b) (bounds [-1, 1] make the scaling the identity).
OptionPolicySet constant_policies(const std::vector<double>& target_actions) {
  OptionPolicySet set = OptionPolicySet::init(
      static_cast<int>(target_actions.size()), 1, 1, {}, vec1(-1.0), vec1(1.0),
      1e-3, 7);
  for (int o = 0; o < set.option_count(); ++o) {
    const double b = std::atanh(target_actions[o]);
    set.policy(o) = wire_single(1, 1, Activation::Tanh, MatrixXd::Zero(1, 1), vec1(b));
    set.target(o) = set.policy(o);
  }
  return set;
}

}  // namespace

TEST_SUITE("critic") {

TEST_CASE("init builds distinct twins with exact target copies") {
  const TwinCritic c = TwinCritic::init(3, 2, {8, 4}, 0.002, 42);
  CHECK(c.state_dim == 3);
  CHECK(c.action_dim == 2);
  CHECK(c.q1.input_dim() == 5);
  CHECK(c.q1.output_dim() == 1);
  CHECK(flatten_params(c.q1) != flatten_params(c.q2));
  CHECK(flatten_params(c.q1) == flatten_params(c.q1_target));
  CHECK(flatten_params(c.q2) == flatten_params(c.q2_target));
  CHECK(c.adam1.lr == 0.002);
  CHECK(c.adam1.step_count == 0);
  CHECK_THROWS_AS((void)TwinCritic::init(0, 2, {8}, 1e-3, 1), ContractViolation);
}

TEST_CASE("value heads match direct forward passes") {
  const TwinCritic c = TwinCritic::init(2, 1, {6}, 1e-3, 5);
  VectorXd s(2), a(1);
  s << 0.3, -0.8;
  a << 0.4;
  VectorXd x(3);
  x << s, a;
  CHECK(c.value(s, a, QHead::Q1) == forward(c.q1, x)[0]);
  CHECK(c.value(s, a, QHead::Q2) == forward(c.q2, x)[0]);
  CHECK(c.value(s, a, QHead::Min) ==
        std::min(c.value(s, a, QHead::Q1), c.value(s, a, QHead::Q2)));
  // Fresh targets equal the online twins.
  CHECK(c.value(s, a, QHead::MinTarget) == c.value(s, a, QHead::Min));

  // The target heads read the target copies, not the online nets.
  TwinCritic d = c;
  set_params(d.q1, flatten_params(d.q1) * 2.0 + VectorXd::Ones(d.q1.parameter_count()));
  set_params(d.q2, flatten_params(d.q2) * 2.0 + VectorXd::Ones(d.q2.parameter_count()));
  CHECK(d.value(s, a, QHead::MinTarget) == c.value(s, a, QHead::MinTarget));
}

TEST_CASE("td target equals reward plus discounted constant target value") {
  // Both target twins output 2 everywhere; the bootstrap term is exact.
  TwinCritic c = wired_critic(1, 1, MatrixXd::Zero(1, 2), vec1(0.0));
  c.q1_target.layers[0].b = vec1(2.0);
  c.q2_target.layers[0].b = vec1(2.0);
  const OptionPolicySet policies = constant_policies({0.0});

  std::vector<Transition> batch = {
      make_t(vec1(0.0), vec1(0.1), 1.0, vec1(0.0), false)};
  Rng rng(11, 3);
  const auto y = compute_td_target(c, batch, policies, 0.99, 0.0, 0.5, rng);
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(2.98).epsilon(1e-15));
}

TEST_CASE("terminal transitions take the raw reward and still burn noise draws") {
  TwinCritic c = wired_critic(1, 1, MatrixXd::Zero(1, 2), vec1(5.0));
  const OptionPolicySet policies = constant_policies({0.0});
  std::vector<Transition> batch = {
      make_t(vec1(0.0), vec1(0.1), 0.75, vec1(0.0), true),
      make_t(vec1(0.0), vec1(0.1), 1.0, vec1(0.0), false)};

  Rng rng(13, 3);
  Rng shadow = rng;
  const auto y = compute_td_target(c, batch, policies, 0.9, 0.2, 0.5, rng);
  CHECK(y[0] == 0.75);  // no bootstrap through a task terminal
  CHECK(y[1] == doctest::Approx(1.0 + 0.9 * 5.0).epsilon(1e-15));

  // Exactly one normal per action dimension per batch element, terminal or not.
  for (int i = 0; i < 2; ++i) (void)shadow.normal();
  CHECK(rng == shadow);
}

TEST_CASE("smoothing noise is clipped then the action is clipped to bounds") {
  // Target critic reads out the action coordinate: q(s, a) = a.
  MatrixXd W(1, 2);
  W << 0.0, 1.0;
  TwinCritic c = wired_critic(1, 1, W, vec1(0.0));
  const OptionPolicySet policies = constant_policies({0.9});

  std::vector<Transition> batch;
  for (int i = 0; i < 12; ++i)
    batch.push_back(make_t(vec1(0.0), vec1(0.0), 0.5, vec1(0.0), false));

  const double sigma = 10.0, clip = 0.3, gamma = 0.95;
  Rng rng(17, 3);
  Rng shadow = rng;
  const auto y = compute_td_target(c, batch, policies, gamma, sigma, clip, rng);
  for (int i = 0; i < 12; ++i) {
    const double eps = shadow.normal(0.0, sigma);
    const double a = std::clamp(0.9 + std::clamp(eps, -clip, clip), -1.0, 1.0);
    CHECK(y[i] == doctest::Approx(0.5 + gamma * a).epsilon(1e-15));
  }
}

TEST_CASE("bootstrap option is the argmax of target option values") {
  // q(s, a) = a makes the higher-action option the argmax.
  MatrixXd W(1, 2);
  W << 0.0, 1.0;
  TwinCritic c = wired_critic(1, 1, W, vec1(0.0));
  OptionPolicySet policies = constant_policies({-0.4, 0.7});

  std::vector<Transition> batch = {
      make_t(vec1(0.0), vec1(0.0), 0.0, vec1(0.0), false)};
  Rng rng(19, 3);
  auto y = compute_td_target(c, batch, policies, 1.0, 0.0, 0.5, rng);
  CHECK(y[0] == doctest::Approx(0.7).epsilon(1e-15));

  // The argmax runs on the target policies; moving the online nets is inert.
  policies.policy(0) =
      wire_single(1, 1, Activation::Tanh, MatrixXd::Zero(1, 1), vec1(std::atanh(0.99)));
  y = compute_td_target(c, batch, policies, 1.0, 0.0, 0.5, rng);
  CHECK(y[0] == doctest::Approx(0.7).epsilon(1e-15));

  // Flip the sign of the critic and the other option wins.
  MatrixXd Wneg(1, 2);
  Wneg << 0.0, -1.0;
  TwinCritic cneg = wired_critic(1, 1, Wneg, vec1(0.0));
  y = compute_td_target(cneg, batch, constant_policies({-0.4, 0.7}), 1.0, 0.0, 0.5, rng);
  CHECK(y[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("critic update reports the pre-step mean squared errors") {
  MatrixXd W(1, 3);
  W << 1.0, -1.0, 0.5;
  TwinCritic c = TwinCritic::init(2, 1, {}, 1e-3, 3);
  c.q1 = wire_single(3, 1, Activation::Identity, W, vec1(0.25));
  c.q2 = wire_single(3, 1, Activation::Identity, 2.0 * W, vec1(0.0));

  VectorXd s1(2), s2(2);
  s1 << 1.0, 0.0;
  s2 << 0.0, 2.0;
  std::vector<Transition> batch = {make_t(s1, vec1(0.5), 0.0, s1, false),
                                   make_t(s2, vec1(-0.5), 0.0, s2, false)};
  const std::vector<double> targets = {1.0, -1.0};

  // Hand MSE: q1 predictions 1.5 and -2.0, q2 predictions 2.5 and -4.5.
  const double want1 = ((1.5 - 1.0) * (1.5 - 1.0) + (-2.0 + 1.0) * (-2.0 + 1.0)) / 2.0;
  const double want2 = ((2.5 - 1.0) * (2.5 - 1.0) + (-4.5 + 1.0) * (-4.5 + 1.0)) / 2.0;

  const VectorXd q1_before = flatten_params(c.q1);
  const VectorXd t1_before = flatten_params(c.q1_target);
  const auto [l1, l2] = critic_update(c, batch, targets);
  CHECK(l1 == doctest::Approx(want1).epsilon(1e-14));
  CHECK(l2 == doctest::Approx(want2).epsilon(1e-14));
  CHECK(c.adam1.step_count == 1);
  CHECK(c.adam2.step_count == 1);
  // Online twins moved; targets stayed put.
  CHECK(flatten_params(c.q1) != q1_before);
  CHECK(flatten_params(c.q1_target) == t1_before);
}

TEST_CASE("repeated updates shrink the loss on a fixed batch") {
  TwinCritic c = TwinCritic::init(2, 1, {16}, 1e-3, 31);
  Rng rng(32, 0);
  std::vector<Transition> batch;
  std::vector<double> targets;
  for (int i = 0; i < 32; ++i) {
    VectorXd s(2), a(1);
    s << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    a << rng.uniform(-1.0, 1.0);
    batch.push_back(make_t(s, a, 0.0, s, false));
    targets.push_back(s[0] * a[0]);
  }
  double first = 0.0, last = 0.0;
  for (int it = 0; it < 200; ++it) {
    const auto [l1, l2] = critic_update(c, batch, targets);
    if (it == 0) first = l1 + l2;
    last = l1 + l2;
  }
  CHECK(last < 0.2 * first);
}

TEST_CASE("critic update rejects malformed inputs") {
  TwinCritic c = TwinCritic::init(1, 1, {}, 1e-3, 3);
  std::vector<Transition> batch = {
      make_t(vec1(0.0), vec1(0.1), 0.0, vec1(0.0), false)};
  const std::vector<double> empty;
  CHECK_THROWS_AS((void)critic_update(c, std::span<const Transition>{}, empty),
                  InsufficientData);
  const std::vector<double> two = {1.0, 2.0};
  CHECK_THROWS_AS((void)critic_update(c, batch, two), ContractViolation);
  const std::vector<double> bad = {std::nan("")};
  CHECK_THROWS_AS((void)critic_update(c, batch, bad), NumericalError);
}

}  // TEST_SUITE
