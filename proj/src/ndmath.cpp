#include "adhrl/ndmath.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "adhrl/errors.hpp"

namespace adhrl {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

bool all_finite(const VectorXd& v) { return v.allFinite(); }

VectorXd apply_activation(Activation act, const VectorXd& z) {
  switch (act) {
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::Identity:
      return z;
    case Activation::Softmax: {
      // Max subtraction keeps exp() in range; softmax is shift invariant.
      const double m = z.maxCoeff();
      VectorXd e = (z.array() - m).exp().matrix();
      return e / e.sum();
    }
  }
  throw ContractViolation("apply_activation: unknown activation");
}

// dz = d<g, act(z)>/dz given the activation output y (and pre-activation z
// for relu). Softmax uses the full Jacobian: dz = y .* (g - <g, y>).
VectorXd activation_backward(Activation act, const VectorXd& z,
                             const VectorXd& y, const VectorXd& g) {
  switch (act) {
    case Activation::Relu:
      return (z.array() > 0.0).select(g, VectorXd::Zero(g.size()));
    case Activation::Tanh:
      return (g.array() * (1.0 - y.array().square())).matrix();
    case Activation::Identity:
      return g;
    case Activation::Softmax: {
      const double dot = g.dot(y);
      return (y.array() * (g.array() - dot)).matrix();
    }
  }
  throw ContractViolation("activation_backward: unknown activation");
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  if (name == "softmax") return Activation::Softmax;
  throw ConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

int DenseNet::parameter_count() const {
  int n = 0;
  for (const auto& l : layers) n += static_cast<int>(l.W.size() + l.b.size());
  return n;
}

GradientBundle GradientBundle::zeros_like(const DenseNet& net) {
  GradientBundle g;
  g.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    g.layers.push_back({MatrixXd::Zero(l.W.rows(), l.W.cols()),
                        VectorXd::Zero(l.b.size())});
  }
  g.input_grad = VectorXd::Zero(net.input_dim());
  return g;
}

void GradientBundle::add(const GradientBundle& other) {
  require(layers.size() == other.layers.size(), "GradientBundle::add: shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].dW += other.layers[i].dW;
    layers[i].db += other.layers[i].db;
  }
  if (input_grad.size() == other.input_grad.size())
    input_grad += other.input_grad;
}

void GradientBundle::scale(double s) {
  for (auto& l : layers) {
    l.dW *= s;
    l.db *= s;
  }
  input_grad *= s;
}

VectorXd GradientBundle::flatten() const {
  int n = 0;
  for (const auto& l : layers) n += static_cast<int>(l.dW.size() + l.db.size());
  VectorXd out(n);
  int at = 0;
  for (const auto& l : layers) {
    for (int r = 0; r < l.dW.rows(); ++r)
      for (int c = 0; c < l.dW.cols(); ++c) out[at++] = l.dW(r, c);
    for (int i = 0; i < l.db.size(); ++i) out[at++] = l.db[i];
  }
  return out;
}

AdamState AdamState::init(const DenseNet& net, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto& l : net.layers) {
    s.m.push_back({MatrixXd::Zero(l.W.rows(), l.W.cols()), VectorXd::Zero(l.b.size())});
    s.v.push_back({MatrixXd::Zero(l.W.rows(), l.W.cols()), VectorXd::Zero(l.b.size())});
  }
  return s;
}

double init_bound(int fan_in) {
  require(fan_in > 0, "init_bound: fan_in must be positive");
  return 1.0 / std::sqrt(static_cast<double>(fan_in));
}

DenseNet net_init(const std::vector<int>& layer_sizes,
                  const std::vector<Activation>& activations,
                  std::uint64_t seed) {
  require(layer_sizes.size() >= 2, "net_init: need at least input and output sizes");
  require(activations.size() == layer_sizes.size() - 1,
          "net_init: one activation per layer required");
  for (int s : layer_sizes) require(s > 0, "net_init: layer sizes must be positive");

  Rng rng(seed);
  DenseNet net;
  net.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double bound = init_bound(in);
    Layer layer;
    layer.W = MatrixXd(out, in);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.W(r, c) = rng.uniform(-bound, bound);
    layer.b = VectorXd::Zero(out);
    layer.act = activations[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

VectorXd forward(const DenseNet& net, const VectorXd& input) {
  require(input.size() == net.input_dim(), "forward: input dimension mismatch");
  if (!all_finite(input)) throw NumericalError("forward: non-finite input");
  VectorXd h = input;
  for (const auto& layer : net.layers) {
    h = apply_activation(layer.act, layer.W * h + layer.b);
  }
  return h;
}

GradientBundle backward(const DenseNet& net, const VectorXd& input,
                        const VectorXd& output_grad) {
  require(input.size() == net.input_dim(), "backward: input dimension mismatch");
  require(output_grad.size() == net.output_dim(),
          "backward: output_grad dimension mismatch");
  if (!all_finite(input) || !all_finite(output_grad))
    throw NumericalError("backward: non-finite input");

  const std::size_t L = net.layers.size();
  std::vector<VectorXd> inputs(L);   // activation fed into each layer
  std::vector<VectorXd> preact(L);   // z = W h + b
  std::vector<VectorXd> outputs(L);  // act(z)
  VectorXd h = input;
  for (std::size_t l = 0; l < L; ++l) {
    inputs[l] = h;
    preact[l] = net.layers[l].W * h + net.layers[l].b;
    outputs[l] = apply_activation(net.layers[l].act, preact[l]);
    h = outputs[l];
  }

  GradientBundle g = GradientBundle::zeros_like(net);
  VectorXd grad = output_grad;
  for (std::size_t l = L; l-- > 0;) {
    const VectorXd dz =
        activation_backward(net.layers[l].act, preact[l], outputs[l], grad);
    g.layers[l].dW = dz * inputs[l].transpose();
    g.layers[l].db = dz;
    grad = net.layers[l].W.transpose() * dz;
  }
  g.input_grad = grad;
  return g;
}

void adam_step(AdamState& state, DenseNet& net, const GradientBundle& grads,
               bool ascend) {
  require(state.m.size() == net.layers.size(), "adam_step: state/net mismatch");
  require(grads.layers.size() == net.layers.size(), "adam_step: grads/net mismatch");

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (!grads.layers[l].dW.allFinite() || !grads.layers[l].db.allFinite())
      throw NumericalError("adam_step: non-finite gradient in layer " +
                           std::to_string(l));
  }

  state.step_count += 1;
  const double b1c = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double b2c = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  const double sign = ascend ? 1.0 : -1.0;

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& m = state.m[l];
    auto& v = state.v[l];
    const auto& gw = grads.layers[l].dW;
    const auto& gb = grads.layers[l].db;
    m.dW = state.beta1 * m.dW + (1.0 - state.beta1) * gw;
    m.db = state.beta1 * m.db + (1.0 - state.beta1) * gb;
    v.dW = state.beta2 * v.dW.array().matrix() + (1.0 - state.beta2) * gw.array().square().matrix();
    v.db = state.beta2 * v.db.array().matrix() + (1.0 - state.beta2) * gb.array().square().matrix();

    net.layers[l].W.array() += sign * state.lr * (m.dW.array() / b1c) /
                               ((v.dW.array() / b2c).sqrt() + state.epsilon);
    net.layers[l].b.array() += sign * state.lr * (m.db.array() / b1c) /
                               ((v.db.array() / b2c).sqrt() + state.epsilon);
  }
}

DenseNet soft_update(const DenseNet& target, const DenseNet& online, double tau) {
  require(target.layer_sizes == online.layer_sizes, "soft_update: shape mismatch");
  DenseNet out = target;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    out.layers[l].W = tau * online.layers[l].W + (1.0 - tau) * target.layers[l].W;
    out.layers[l].b = tau * online.layers[l].b + (1.0 - tau) * target.layers[l].b;
  }
  return out;
}

VectorXd flatten_params(const DenseNet& net) {
  VectorXd out(net.parameter_count());
  int at = 0;
  for (const auto& l : net.layers) {
    for (int r = 0; r < l.W.rows(); ++r)
      for (int c = 0; c < l.W.cols(); ++c) out[at++] = l.W(r, c);
    for (int i = 0; i < l.b.size(); ++i) out[at++] = l.b[i];
  }
  return out;
}

void set_params(DenseNet& net, const VectorXd& flat) {
  require(flat.size() == net.parameter_count(), "set_params: size mismatch");
  int at = 0;
  for (auto& l : net.layers) {
    for (int r = 0; r < l.W.rows(); ++r)
      for (int c = 0; c < l.W.cols(); ++c) l.W(r, c) = flat[at++];
    for (int i = 0; i < l.b.size(); ++i) l.b[i] = flat[at++];
  }
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw IoError("parse_double: bad numeric token '" + token + "'");
  return x;
}

namespace {

void write_matrix(std::ostream& os, const MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

void write_vector(std::ostream& os, const VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_double(v[i]);
  }
  os << '\n';
}

std::string next_line(std::istream& is, const std::string& ctx) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("unexpected end of input in " + ctx);
  return line;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

MatrixXd read_matrix(std::istream& is, int rows, int cols, const std::string& ctx) {
  MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto toks = tokens(next_line(is, ctx));
    if (static_cast<int>(toks.size()) != cols)
      throw IoError(ctx + ": expected " + std::to_string(cols) + " values per row");
    for (int c = 0; c < cols; ++c) m(r, c) = parse_double(toks[c]);
  }
  return m;
}

VectorXd read_vector(std::istream& is, int n, const std::string& ctx) {
  const auto toks = tokens(next_line(is, ctx));
  if (static_cast<int>(toks.size()) != n)
    throw IoError(ctx + ": expected " + std::to_string(n) + " values");
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = parse_double(toks[i]);
  return v;
}

}  // namespace

void save_net(std::ostream& os, const DenseNet& net) {
  os << "densenet 1\n";
  os << "sizes";
  for (int s : net.layer_sizes) os << ' ' << s;
  os << "\nactivations";
  for (const auto& l : net.layers) os << ' ' << to_string(l.act);
  os << '\n';
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    os << "W" << l << '\n';
    write_matrix(os, net.layers[l].W);
    os << "b" << l << '\n';
    write_vector(os, net.layers[l].b);
  }
}

DenseNet load_net(std::istream& is) {
  auto header = tokens(next_line(is, "densenet header"));
  if (header.size() != 2 || header[0] != "densenet")
    throw IoError("densenet: bad header");
  if (header[1] != "1")
    throw IoError("densenet: unsupported format version " + header[1]);

  auto size_toks = tokens(next_line(is, "densenet sizes"));
  if (size_toks.size() < 3 || size_toks[0] != "sizes")
    throw IoError("densenet: bad sizes line");
  std::vector<int> sizes;
  for (std::size_t i = 1; i < size_toks.size(); ++i)
    sizes.push_back(std::stoi(size_toks[i]));

  auto act_toks = tokens(next_line(is, "densenet activations"));
  if (act_toks.empty() || act_toks[0] != "activations" ||
      act_toks.size() != sizes.size())
    throw IoError("densenet: bad activations line");

  DenseNet net;
  net.layer_sizes = sizes;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Layer layer;
    layer.act = activation_from_string(act_toks[l + 1]);
    auto wtag = tokens(next_line(is, "densenet W tag"));
    if (wtag.size() != 1 || wtag[0] != "W" + std::to_string(l))
      throw IoError("densenet: expected W" + std::to_string(l));
    layer.W = read_matrix(is, sizes[l + 1], sizes[l], "densenet W" + std::to_string(l));
    auto btag = tokens(next_line(is, "densenet b tag"));
    if (btag.size() != 1 || btag[0] != "b" + std::to_string(l))
      throw IoError("densenet: expected b" + std::to_string(l));
    layer.b = read_vector(is, sizes[l + 1], "densenet b" + std::to_string(l));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void save_adam(std::ostream& os, const AdamState& s) {
  os << "adam 1\n";
  os << "hyper " << format_double(s.lr) << ' ' << format_double(s.beta1) << ' '
     << format_double(s.beta2) << ' ' << format_double(s.epsilon) << ' '
     << s.step_count << '\n';
  for (std::size_t l = 0; l < s.m.size(); ++l) {
    os << "m" << l << '\n';
    write_matrix(os, s.m[l].dW);
    write_vector(os, s.m[l].db);
    os << "v" << l << '\n';
    write_matrix(os, s.v[l].dW);
    write_vector(os, s.v[l].db);
  }
}

AdamState load_adam(std::istream& is, const DenseNet& shape_ref) {
  auto header = tokens(next_line(is, "adam header"));
  if (header.size() != 2 || header[0] != "adam") throw IoError("adam: bad header");
  if (header[1] != "1") throw IoError("adam: unsupported format version " + header[1]);

  auto hyper = tokens(next_line(is, "adam hyper"));
  if (hyper.size() != 6 || hyper[0] != "hyper") throw IoError("adam: bad hyper line");
  AdamState s;
  s.lr = parse_double(hyper[1]);
  s.beta1 = parse_double(hyper[2]);
  s.beta2 = parse_double(hyper[3]);
  s.epsilon = parse_double(hyper[4]);
  s.step_count = std::stoll(hyper[5]);

  for (std::size_t l = 0; l < shape_ref.layers.size(); ++l) {
    const int rows = static_cast<int>(shape_ref.layers[l].W.rows());
    const int cols = static_cast<int>(shape_ref.layers[l].W.cols());
    auto mtag = tokens(next_line(is, "adam m tag"));
    if (mtag.size() != 1 || mtag[0] != "m" + std::to_string(l))
      throw IoError("adam: expected m" + std::to_string(l));
    GradientBundle::LayerGrad m;
    m.dW = read_matrix(is, rows, cols, "adam m" + std::to_string(l));
    m.db = read_vector(is, rows, "adam m" + std::to_string(l));
    s.m.push_back(std::move(m));
    auto vtag = tokens(next_line(is, "adam v tag"));
    if (vtag.size() != 1 || vtag[0] != "v" + std::to_string(l))
      throw IoError("adam: expected v" + std::to_string(l));
    GradientBundle::LayerGrad v;
    v.dW = read_matrix(is, rows, cols, "adam v" + std::to_string(l));
    v.db = read_vector(is, rows, "adam v" + std::to_string(l));
    s.v.push_back(std::move(v));
  }
  return s;
}

}  // namespace adhrl
