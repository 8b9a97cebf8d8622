#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mlgan {

struct GradientCaseResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t instances = 0;
};

/// Gradient checks of every objective through small random generator and
/// discriminator MLPs (two hidden layers, m = 4, all widths <= 8). Each case
/// reports its worst relative error over `instances` random draws.
std::vector<GradientCaseResult> run_gradient_suite(std::size_t instances = 20, std::uint64_t seed = 0,
                                                   double h = 1e-5);

}  // namespace mlgan
