#include "adhrl/optionnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

constexpr double kTinyProb = 1e-300;  // keeps logs finite if softmax underflows

VectorXd concat(const VectorXd& s, const VectorXd& a) {
  VectorXd x(s.size() + a.size());
  x << s, a;
  return x;
}

double safe_log(double p) { return std::log(std::max(p, kTinyProb)); }

struct LossEval {
  double loss = 0.0;
  double vat = 0.0;
  double mi = 0.0;
  GradientBundle grad;
};

// One pass over the batch computing the full objective
//   loss = VAT - lambda * (H(marginal) - H(conditional))
// and, when requested, its exact parameter gradient. Gradients flow through
// both the clean and the perturbed posterior of the VAT term.
LossEval eval_option_loss(const OptionNet& onet, const WeightedBatch& batch,
                          const VatNoise& noise, double lambda, bool want_grad) {
  batch.check();
  const int n = batch.size();
  const int od = onet.option_count();
  if (noise.eps.rows() != n)
    throw ContractViolation("option_loss: noise/batch size mismatch");

  std::vector<VectorXd> xs(n), xs_pert(n), p(n), q(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = concat(batch.states[i], batch.actions[i]);
    if (noise.eps.cols() != xs[i].size())
      throw ContractViolation("option_loss: noise dimension mismatch");
    xs_pert[i] = xs[i] + noise.eps.row(i).transpose();
    p[i] = forward(onet.net(), xs[i]);
    q[i] = forward(onet.net(), xs_pert[i]);
  }

  VectorXd marginal = VectorXd::Zero(od);
  for (int i = 0; i < n; ++i) marginal += batch.weights[i] * p[i];
  marginal /= static_cast<double>(n);

  double h_marginal = 0.0;
  for (int o = 0; o < od; ++o)
    if (marginal[o] > 0.0) h_marginal -= marginal[o] * std::log(marginal[o]);

  double h_cond = 0.0;
  double vat = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int o = 0; o < od; ++o) {
      if (p[i][o] > 0.0) h_cond -= batch.weights[i] * p[i][o] * std::log(p[i][o]);
      vat += q[i][o] * (safe_log(q[i][o]) - safe_log(p[i][o]));
    }
  }
  h_cond /= static_cast<double>(n);
  vat /= static_cast<double>(n);

  LossEval out;
  out.mi = h_marginal - h_cond;
  out.vat = vat;
  out.loss = vat - lambda * out.mi;
  if (!want_grad) return out;

  out.grad = GradientBundle::zeros_like(onet.net());
  VectorXd dp(od), dq(od);
  for (int i = 0; i < n; ++i) {
    const double wi_n = batch.weights[i] / static_cast<double>(n);
    for (int o = 0; o < od; ++o) {
      const double po = std::max(p[i][o], kTinyProb);
      // d/dp of: VAT cross term, -lambda*H(marginal), +lambda*H(conditional).
      dp[o] = -q[i][o] / po / static_cast<double>(n) -
              lambda * wi_n * (safe_log(po) - safe_log(marginal[o]));
      dq[o] = (safe_log(q[i][o]) - safe_log(po) + 1.0) / static_cast<double>(n);
    }
    out.grad.add(backward(onet.net(), xs[i], dp));
    out.grad.add(backward(onet.net(), xs_pert[i], dq));
  }
  return out;
}

}  // namespace

OptionNet OptionNet::init(int option_count, int state_dim, int action_dim,
                          const std::vector<int>& hidden_sizes, double lr,
                          double lambda_mi, double vat_noise_variance,
                          std::uint64_t seed) {
  if (option_count < 1)
    throw ContractViolation("OptionNet::init: need at least one option");
  OptionNet net;
  net.option_count_ = option_count;
  net.lambda_mi_ = lambda_mi;
  net.vat_noise_variance_ = vat_noise_variance;
  std::vector<int> sizes;
  sizes.push_back(state_dim + action_dim);
  for (int h : hidden_sizes) sizes.push_back(h);
  sizes.push_back(option_count);
  std::vector<Activation> acts(hidden_sizes.size(), Activation::Relu);
  acts.push_back(Activation::Softmax);
  net.net_ = net_init(sizes, acts, seed);
  net.adam_ = AdamState::init(net.net_, lr);
  return net;
}

VectorXd OptionNet::posterior(const VectorXd& state, const VectorXd& action) const {
  return forward(net_, concat(state, action));
}

void WeightedBatch::check() const {
  const int n = size();
  if (n == 0) throw ContractViolation("WeightedBatch: empty batch");
  if (static_cast<int>(actions.size()) != n || advantages.size() != n ||
      behavior_log_densities.size() != n || weights.size() != n)
    throw ContractViolation("WeightedBatch: field sizes disagree");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw ContractViolation("WeightedBatch: negative weight");
    sum += weights[i];
  }
  if (std::abs(sum - static_cast<double>(n)) > 1e-9 * static_cast<double>(n))
    throw ContractViolation("WeightedBatch: weights must sum to N (mean one)");
}

VectorXd compute_advantages(const TwinCritic& critic, const OptionPolicySet& policies,
                            const std::vector<VectorXd>& states,
                            const std::vector<VectorXd>& actions) {
  if (states.size() != actions.size())
    throw ContractViolation("compute_advantages: states/actions size mismatch");
  VectorXd adv(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    adv[i] = critic.value(states[i], actions[i], QHead::Min) -
             state_value(policies, critic, states[i]);
  }
  return adv;
}

VectorXd importance_weights(const VectorXd& advantages,
                            const VectorXd& behavior_log_densities) {
  const int n = static_cast<int>(advantages.size());
  if (n == 0) throw InsufficientData("importance_weights: empty input");
  if (behavior_log_densities.size() != n)
    throw ContractViolation("importance_weights: size mismatch");
  if (!advantages.allFinite() || !behavior_log_densities.allFinite())
    throw NumericalError("importance_weights: non-finite input");

  // w_i = exp(A_i - log beta_i) up to normalization; shift by the max exponent
  // before exp() so the largest weight is exactly 1 pre-normalization.
  VectorXd expo = advantages - behavior_log_densities;
  const double m = expo.maxCoeff();
  VectorXd w = (expo.array() - m).exp().matrix();
  const double sum = w.sum();
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw NumericalError("importance_weights: degenerate normalization");
  return w * (static_cast<double>(n) / sum);
}

VectorXd weighted_marginal(const OptionNet& onet, const WeightedBatch& batch) {
  batch.check();
  VectorXd m = VectorXd::Zero(onet.option_count());
  for (int i = 0; i < batch.size(); ++i)
    m += batch.weights[i] * onet.posterior(batch.states[i], batch.actions[i]);
  return m / static_cast<double>(batch.size());
}

double weighted_entropy(const VectorXd& marginal) {
  double h = 0.0;
  for (int o = 0; o < marginal.size(); ++o) {
    if (marginal[o] < 0.0)
      throw ContractViolation("weighted_entropy: negative probability");
    if (marginal[o] > 0.0) h -= marginal[o] * std::log(marginal[o]);
  }
  return h;
}

double weighted_conditional_entropy(const OptionNet& onet, const WeightedBatch& batch) {
  batch.check();
  double h = 0.0;
  for (int i = 0; i < batch.size(); ++i) {
    const VectorXd p = onet.posterior(batch.states[i], batch.actions[i]);
    for (int o = 0; o < p.size(); ++o)
      if (p[o] > 0.0) h -= batch.weights[i] * p[o] * std::log(p[o]);
  }
  return h / static_cast<double>(batch.size());
}

double weighted_mutual_information(const OptionNet& onet, const WeightedBatch& batch) {
  return weighted_entropy(weighted_marginal(onet, batch)) -
         weighted_conditional_entropy(onet, batch);
}

VatNoise draw_vat_noise(int n, int state_dim, int action_dim, double variance,
                        Rng& rng) {
  if (variance < 0.0) throw ContractViolation("draw_vat_noise: negative variance");
  const double sd = std::sqrt(variance);
  VatNoise noise;
  noise.eps = MatrixXd(n, state_dim + action_dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < state_dim + action_dim; ++j)
      noise.eps(i, j) = rng.normal(0.0, sd);
  return noise;
}

double vat_penalty(const OptionNet& onet, const WeightedBatch& batch,
                   const VatNoise& noise) {
  return eval_option_loss(onet, batch, noise, 0.0, false).vat;
}

double vat_penalty(const OptionNet& onet, const WeightedBatch& batch,
                   double noise_variance, Rng& rng) {
  const int dim = static_cast<int>(batch.states.front().size() +
                                   batch.actions.front().size());
  const VatNoise noise = draw_vat_noise(batch.size(), dim, 0, noise_variance, rng);
  return vat_penalty(onet, batch, noise);
}

double option_loss(const OptionNet& onet, const WeightedBatch& batch,
                   const VatNoise& noise) {
  return eval_option_loss(onet, batch, noise, onet.lambda_mi(), false).loss;
}

GradientBundle option_loss_gradient(const OptionNet& onet, const WeightedBatch& batch,
                                    const VatNoise& noise) {
  return eval_option_loss(onet, batch, noise, onet.lambda_mi(), true).grad;
}

OptionTrainData make_train_data(const OnPolicyBuffer& buffer, const TwinCritic& critic,
                                const OptionPolicySet& policies) {
  if (buffer.size() == 0)
    throw InsufficientData("make_train_data: on-policy buffer is empty");
  OptionTrainData data;
  data.states.reserve(buffer.size());
  data.actions.reserve(buffer.size());
  data.behavior_log_densities = VectorXd(buffer.size());
  int i = 0;
  for (const Transition& t : buffer.transitions()) {
    data.states.push_back(t.state);
    data.actions.push_back(t.action);
    data.behavior_log_densities[i++] = t.behavior_log_density;
  }
  data.advantages = compute_advantages(critic, policies, data.states, data.actions);
  return data;
}

OptionTrainResult train_option_network(OptionNet& onet, const OptionTrainData& data,
                                       int epochs, int minibatch_size,
                                       bool uniform_weights, Rng& rng) {
  const int n = data.size();
  if (n == 0) throw InsufficientData("train_option_network: no data");
  if (minibatch_size < 1)
    throw ContractViolation("train_option_network: minibatch_size must be >= 1");

  const int mb = std::min(minibatch_size, n);
  const int state_dim = static_cast<int>(data.states.front().size());
  const int action_dim = static_cast<int>(data.actions.front().size());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  OptionTrainResult result;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates with our own stream so runs stay bit-reproducible.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }

    const bool last_epoch = epoch == epochs - 1;
    double epoch_loss = 0.0;
    double epoch_mi = 0.0;
    int chunks = 0;
    for (int start = 0; start + mb <= n; start += mb, ++chunks) {
      WeightedBatch batch;
      batch.advantages = VectorXd(mb);
      batch.behavior_log_densities = VectorXd(mb);
      for (int k = 0; k < mb; ++k) {
        const int idx = order[start + k];
        batch.states.push_back(data.states[idx]);
        batch.actions.push_back(data.actions[idx]);
        batch.advantages[k] = data.advantages[idx];
        batch.behavior_log_densities[k] = data.behavior_log_densities[idx];
      }
      batch.weights = uniform_weights
                          ? VectorXd::Ones(mb)
                          : importance_weights(batch.advantages,
                                               batch.behavior_log_densities);

      const VatNoise noise = draw_vat_noise(mb, state_dim, action_dim,
                                            onet.vat_noise_variance(), rng);
      const LossEval eval =
          eval_option_loss(onet, batch, noise, onet.lambda_mi(), true);
      adam_step(onet.adam(), onet.net(), eval.grad);
      epoch_loss += eval.loss;
      if (last_epoch) epoch_mi += eval.mi;
    }
    if (chunks > 0) {
      result.loss_per_epoch.push_back(epoch_loss / chunks);
      if (last_epoch) {
        result.final_loss = epoch_loss / chunks;
        result.final_mi = epoch_mi / chunks;
      }
    }
  }
  return result;
}

}  // namespace adhrl
