#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mlgan/random.hpp"
#include "mlgan/tensor.hpp"

namespace mlgan {

/// Isotropic 2-D Gaussian mixture.
struct MixtureSpec {
  std::vector<std::array<double, 2>> centers;
  double sigma = 0.05;
  std::vector<double> weights;

  /// `modes` equally weighted components evenly spaced on a circle.
  static MixtureSpec ring(std::size_t modes = 8, double radius = 2.0, double sigma = 0.05);

  std::size_t components() const { return centers.size(); }
  /// Throws std::invalid_argument unless weights match centers, sum to 1 (+-1e-12)
  /// and sigma > 0.
  void validate() const;
};

struct LabeledSamples {
  Tensor points;  ///< [n, 2]
  std::vector<std::size_t> labels;
};

LabeledSamples sample_mixture_labeled(const MixtureSpec& spec, std::size_t n, Rng& rng);
Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng);
Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace mlgan
