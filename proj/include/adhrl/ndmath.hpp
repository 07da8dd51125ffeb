#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "adhrl/rng.hpp"

namespace adhrl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Small dense MLP substrate shared by critics, option policies and the option
// network. Everything is float64. Gradients are exact reverse-mode for this
// fixed architecture; there is deliberately no general autodiff here.

enum class Activation { Relu, Tanh, Identity, Softmax };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct Layer {
  MatrixXd W;  // out_dim x in_dim
  VectorXd b;  // out_dim
  Activation act;
};

struct DenseNet {
  std::vector<int> layer_sizes;  // input size first, output size last
  std::vector<Layer> layers;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int parameter_count() const;
};

// Per-layer gradients, same shapes as the net, plus the gradient with respect
// to the input vector (needed for the deterministic policy gradient chain).
struct GradientBundle {
  struct LayerGrad {
    MatrixXd dW;
    VectorXd db;
  };
  std::vector<LayerGrad> layers;
  VectorXd input_grad;

  static GradientBundle zeros_like(const DenseNet& net);
  void add(const GradientBundle& other);   // elementwise accumulate
  void scale(double s);
  VectorXd flatten() const;                // params only, checkpoint order
};

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long long step_count = 0;
  std::vector<GradientBundle::LayerGrad> m;  // first moments
  std::vector<GradientBundle::LayerGrad> v;  // second moments

  static AdamState init(const DenseNet& net, double lr);
};

// Weight init bound: uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
double init_bound(int fan_in);

// activations.size() == layer_sizes.size() - 1. Deterministic under seed.
DenseNet net_init(const std::vector<int>& layer_sizes,
                  const std::vector<Activation>& activations,
                  std::uint64_t seed);

VectorXd forward(const DenseNet& net, const VectorXd& input);

// Gradient of <output_grad, forward(net, input)> with respect to every
// parameter and to the input. Recomputes the forward pass internally.
GradientBundle backward(const DenseNet& net, const VectorXd& input,
                        const VectorXd& output_grad);

// One bias-corrected Adam step. ascend=true flips the sign (gradient ascent,
// used by the policy updates).
void adam_step(AdamState& state, DenseNet& net, const GradientBundle& grads,
               bool ascend = false);

// Polyak averaging: tau * online + (1 - tau) * target, elementwise.
DenseNet soft_update(const DenseNet& target, const DenseNet& online, double tau);

// Parameter access for tests and diagnostics. Order matches the export format.
VectorXd flatten_params(const DenseNet& net);
void set_params(DenseNet& net, const VectorXd& flat);

// Versioned structured-text export: architecture header followed by row-major
// parameter rows at 17 significant digits. Round trip is bit exact.
void save_net(std::ostream& os, const DenseNet& net);
DenseNet load_net(std::istream& is);
void save_adam(std::ostream& os, const AdamState& state);
AdamState load_adam(std::istream& is, const DenseNet& shape_ref);

// %.17g formatting used by every text serializer in the project.
std::string format_double(double x);
double parse_double(const std::string& token);

}  // namespace adhrl
