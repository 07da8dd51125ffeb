#pragma once

#include <vector>

#include "adhrl/buffers.hpp"
#include "adhrl/hpolicy.hpp"
#include "adhrl/ndmath.hpp"

namespace adhrl {

// Softmax classifier p(o | s, a) trained by advantage-weighted regularized
// information maximization: minimize vat_penalty - lambda_mi * MI, where
// MI = H(marginal) - H(conditional) under importance-weighted estimates.
class OptionNet {
 public:
  static OptionNet init(int option_count, int state_dim, int action_dim,
                        const std::vector<int>& hidden_sizes, double lr,
                        double lambda_mi, double vat_noise_variance,
                        std::uint64_t seed);

  int option_count() const { return option_count_; }
  double lambda_mi() const { return lambda_mi_; }
  double vat_noise_variance() const { return vat_noise_variance_; }

  VectorXd posterior(const VectorXd& state, const VectorXd& action) const;

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }
  AdamState& adam() { return adam_; }
  const AdamState& adam() const { return adam_; }

 private:
  DenseNet net_;
  AdamState adam_;
  int option_count_ = 0;
  double lambda_mi_ = 0.1;
  double vat_noise_variance_ = 0.04;
};

// A batch carrying mean-one importance weights (sum w = N within 1e-9).
struct WeightedBatch {
  std::vector<VectorXd> states;
  std::vector<VectorXd> actions;
  VectorXd advantages;
  VectorXd behavior_log_densities;
  VectorXd weights;

  int size() const { return static_cast<int>(states.size()); }
  void check() const;  // throws ContractViolation on invariant breaks
};

// A(s_i, a_i) = Q_min(s_i, a_i) - V(s_i) under the online critic and gating.
VectorXd compute_advantages(const TwinCritic& critic, const OptionPolicySet& policies,
                            const std::vector<VectorXd>& states,
                            const std::vector<VectorXd>& actions);

// w_i proportional to exp(A_i) / exp(behavior_log_density_i), normalized to
// mean one. The max of the combined exponent is subtracted before exp(),
// which leaves the normalized result unchanged in exact arithmetic.
VectorXd importance_weights(const VectorXd& advantages,
                            const VectorXd& behavior_log_densities);

// p_hat(o) = (1/N) sum_i w_i p(o | s_i, a_i); sums to one for mean-one weights.
VectorXd weighted_marginal(const OptionNet& onet, const WeightedBatch& batch);

// -sum_o p log p with 0 log 0 = 0.
double weighted_entropy(const VectorXd& marginal);

// -(1/N) sum_i w_i sum_o p(o|s_i,a_i) log p(o|s_i,a_i).
double weighted_conditional_entropy(const OptionNet& onet, const WeightedBatch& batch);

double weighted_mutual_information(const OptionNet& onet, const WeightedBatch& batch);

// Per-sample white-noise perturbations of (state, action), pre-drawn so the
// loss is a deterministic function of parameters under frozen noise.
struct VatNoise {
  MatrixXd eps;  // N x (state_dim + action_dim)
};
VatNoise draw_vat_noise(int n, int state_dim, int action_dim, double variance,
                        Rng& rng);

// Mean KL(p(.|s+eps_s, a+eps_a) || p(.|s, a)); gradients flow through both
// posteriors. Always >= 0.
double vat_penalty(const OptionNet& onet, const WeightedBatch& batch,
                   const VatNoise& noise);
double vat_penalty(const OptionNet& onet, const WeightedBatch& batch,
                   double noise_variance, Rng& rng);

// loss = vat - lambda_mi * (H(o) - H(o|s,a))
double option_loss(const OptionNet& onet, const WeightedBatch& batch,
                   const VatNoise& noise);
GradientBundle option_loss_gradient(const OptionNet& onet, const WeightedBatch& batch,
                                    const VatNoise& noise);

// Advantage / behavior-density snapshot taken once per training round.
struct OptionTrainData {
  std::vector<VectorXd> states;
  std::vector<VectorXd> actions;
  VectorXd advantages;
  VectorXd behavior_log_densities;

  int size() const { return static_cast<int>(states.size()); }
};

OptionTrainData make_train_data(const OnPolicyBuffer& buffer, const TwinCritic& critic,
                                const OptionPolicySet& policies);

struct OptionTrainResult {
  std::vector<double> loss_per_epoch;  // minibatch-mean loss
  double final_loss = 0.0;
  double final_mi = 0.0;
};

// epochs passes of shuffled minibatches. Weights are renormalized per
// minibatch (mean one over its samples) from the snapshotted advantages;
// uniform_weights replaces them with ones (the unweighted baseline mode).
OptionTrainResult train_option_network(OptionNet& onet, const OptionTrainData& data,
                                       int epochs, int minibatch_size,
                                       bool uniform_weights, Rng& rng);

}  // namespace adhrl
