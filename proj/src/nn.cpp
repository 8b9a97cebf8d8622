#include "mlgan/nn.hpp"

#include <cmath>
#include <random>

#include "mlgan/errors.hpp"

namespace mlgan {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "linear";
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::linear, Activation::relu, Activation::leaky_relu, Activation::tanh, Activation::sigmoid})
    if (activation_name(a) == name) return a;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

bool operator==(const DenseLayer& a, const DenseLayer& b) {
  return a.weight == b.weight && a.bias == b.bias && a.activation == b.activation;
}

bool operator==(const Mlp& a, const Mlp& b) { return a.layers_ == b.layers_; }

Mlp Mlp::create(const std::vector<std::size_t>& dims, Activation hidden, Activation output, std::uint64_t seed) {
  if (dims.size() < 2) throw std::invalid_argument("mlp: need at least input and output dimensions");
  for (auto d : dims)
    if (d == 0) throw std::invalid_argument("mlp: layer dimensions must be positive");

  std::mt19937_64 rng(seed);
  Mlp net;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const std::size_t fan_in = dims[i], fan_out = dims[i + 1];
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    DenseLayer layer;
    layer.weight = Tensor({fan_in, fan_out});
    for (double& w : layer.weight.data()) w = normal(rng);
    layer.bias = Tensor({fan_out});
    layer.activation = (i + 2 == dims.size()) ? output : hidden;
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.rows(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.cols(); }

std::vector<std::size_t> Mlp::dims() const {
  std::vector<std::size_t> out;
  if (layers_.empty()) return out;
  out.push_back(input_dim());
  for (const auto& l : layers_) out.push_back(l.weight.cols());
  return out;
}

Activation Mlp::hidden_activation() const {
  return layers_.size() > 1 ? layers_.front().activation : Activation::linear;
}

Activation Mlp::output_activation() const { return layers_.empty() ? Activation::linear : layers_.back().activation; }

std::vector<Var> Mlp::bind(Tape& tape, bool trainable) const {
  std::vector<Var> out;
  out.reserve(layers_.size() * 2);
  for (const auto& l : layers_) {
    out.push_back(tape.leaf(l.weight, trainable));
    out.push_back(tape.leaf(l.bias, trainable));
  }
  return out;
}

namespace {

Var activate(Var x, Activation a) {
  switch (a) {
    case Activation::linear: return x;
    case Activation::relu: return relu(x);
    case Activation::leaky_relu: return leaky_relu(x, kLeakySlope);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  return x;
}

}  // namespace

Var Mlp::forward(Tape& tape, std::span<const Var> bound, Var batch) const {
  (void)tape;
  if (bound.size() != layers_.size() * 2) throw std::invalid_argument("mlp forward: parameter binding has wrong size");
  const Shape& s = batch.shape();
  if (s.size() != 2 || s[1] != input_dim())
    throw ShapeError("mlp forward: batch shape " + shape_string(s) + " does not match input_dim " +
                     std::to_string(input_dim()));
  Var h = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = add_row(matmul(h, bound[2 * i]), bound[2 * i + 1]);
    h = activate(h, layers_[i].activation);
  }
  return h;
}

Tensor Mlp::forward(const Tensor& batch) const {
  Tape tape;
  const auto bound = bind(tape, false);
  return forward(tape, bound, tape.constant(batch)).value();
}

std::vector<Tensor*> Mlp::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

double Mlp::max_abs_parameter() const {
  double m = 0.0;
  for (const auto* p : parameters()) m = std::max(m, p->max_abs());
  return m;
}

ParamSet Mlp::params() const {
  ParamSet out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    out.emplace("layer" + std::to_string(i) + ".weight", layers_[i].weight);
    out.emplace("layer" + std::to_string(i) + ".bias", layers_[i].bias);
  }
  return out;
}

void Mlp::load_params(const ParamSet& params) {
  if (params.size() != layers_.size() * 2)
    throw std::invalid_argument("load_params: expected " + std::to_string(layers_.size() * 2) + " tensors, got " +
                                std::to_string(params.size()));
  std::vector<DenseLayer> next = layers_;
  for (std::size_t i = 0; i < next.size(); ++i) {
    for (auto [suffix, target] : {std::pair{".weight", &next[i].weight}, std::pair{".bias", &next[i].bias}}) {
      const std::string name = "layer" + std::to_string(i) + suffix;
      auto it = params.find(name);
      if (it == params.end()) throw std::invalid_argument("load_params: missing parameter '" + name + "'");
      if (it->second.shape() != target->shape())
        throw ShapeError("load_params: '" + name + "' has shape " + shape_string(it->second.shape()) + ", expected " +
                         shape_string(target->shape()));
      if (!it->second.all_finite()) throw NonFiniteError("load_params: '" + name + "' is not finite");
      *target = it->second;
    }
  }
  layers_ = std::move(next);
}

}  // namespace mlgan
