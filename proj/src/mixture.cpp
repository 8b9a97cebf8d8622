#include "mlgan/mixture.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mlgan {

MixtureSpec MixtureSpec::ring(std::size_t modes, double radius, double sigma) {
  MixtureSpec spec;
  spec.sigma = sigma;
  for (std::size_t k = 0; k < modes; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(modes);
    spec.centers.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  spec.weights.assign(modes, modes ? 1.0 / static_cast<double>(modes) : 0.0);
  return spec;
}

void MixtureSpec::validate() const {
  if (centers.empty()) throw std::invalid_argument("mixture: needs at least one component");
  if (weights.size() != centers.size()) throw std::invalid_argument("mixture: one weight per center required");
  if (!(sigma > 0.0)) throw std::invalid_argument("mixture: sigma must be positive");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("mixture: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture: weights must sum to 1");
}

LabeledSamples sample_mixture_labeled(const MixtureSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("mixture: sample count must be positive");
  std::discrete_distribution<std::size_t> pick(spec.weights.begin(), spec.weights.end());
  LabeledSamples out{Tensor({n, 2}), std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = pick(rng.engine());
    out.labels[i] = k;
    out.points.at(i, 0) = spec.centers[k][0] + spec.sigma * rng.normal();
    out.points.at(i, 1) = spec.centers[k][1] + spec.sigma * rng.normal();
  }
  return out;
}

Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, Rng& rng) {
  return sample_mixture_labeled(spec, n, rng).points;
}

Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_mixture(spec, n, rng);
}

}  // namespace mlgan
