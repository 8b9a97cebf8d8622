#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlgan/tensor.hpp"

namespace mlgan {

struct AdamConfig {
  double alpha = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t t = 0;

  static AdamState zeros_like(std::span<const Tensor* const> params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected Adam descent step applied in place.
/// Throws NonFiniteError (leaving params and state untouched) when a gradient
/// is not finite.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config);

/// Clamps every coordinate into [-c, c].
void clip_weights(std::span<Tensor* const> params, double c);

}  // namespace mlgan
