#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "mlgan/tensor.hpp"

namespace mlgan {

/// Seeded random stream whose full state (engine plus the normal
/// distribution's cached variate) can be saved and restored.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  /// Stream derived from several integers, e.g. (run seed, step, purpose).
  Rng(std::initializer_list<std::uint32_t> seeds);

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  Tensor normal_matrix(std::size_t rows, std::size_t cols);

  std::mt19937_64& engine() { return engine_; }

  std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_ && a.normal_ == b.normal_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace mlgan
