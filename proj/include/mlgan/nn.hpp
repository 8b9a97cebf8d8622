#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlgan/tape.hpp"
#include "mlgan/tensor.hpp"

namespace mlgan {

enum class Activation { linear, relu, leaky_relu, tanh, sigmoid };

inline constexpr double kLeakySlope = 0.2;

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

/// y = act(x W + b), W stored [fan_in, fan_out].
struct DenseLayer {
  Tensor weight;
  Tensor bias;
  Activation activation = Activation::linear;
};

/// Parameter name -> value. Names are "layer<i>.weight" and "layer<i>.bias".
using ParamSet = std::map<std::string, Tensor>;

/// Fully connected network; serves as generator, embedding discriminator and
/// mode classifier.
class Mlp {
 public:
  Mlp() = default;

  /// Gaussian weights with sd sqrt(2 / fan_in), zero biases, drawn from `seed`.
  static Mlp create(const std::vector<std::size_t>& dims, Activation hidden, Activation output,
                    std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<std::size_t> dims() const;
  Activation hidden_activation() const;
  Activation output_activation() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Records every weight and bias on `tape` in the order W0, b0, W1, b1, ...
  std::vector<Var> bind(Tape& tape, bool trainable = true) const;
  Var forward(Tape& tape, std::span<const Var> bound, Var batch) const;
  /// Forward pass without gradient tracking.
  Tensor forward(const Tensor& batch) const;

  /// Parameters in bind() order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;
  double max_abs_parameter() const;

  ParamSet params() const;
  /// Replaces all parameters. Every name must be present with the current shape
  /// and no unknown names are accepted.
  void load_params(const ParamSet& params);

  friend bool operator==(const Mlp&, const Mlp&);

 private:
  std::vector<DenseLayer> layers_;
};

bool operator==(const DenseLayer& a, const DenseLayer& b);

}  // namespace mlgan
