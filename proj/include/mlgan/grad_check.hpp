#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mlgan/tape.hpp"

namespace mlgan {

/// Builds a scalar on `tape` from leaves bound to the parameters (same order).
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
};

/// Compares tape gradients against central differences with step `h`.
/// The per-coordinate error is |analytic - numeric| / max(1, |analytic|).
/// Throws NonFiniteError if f is non-finite at any probe point.
GradCheckReport grad_check_report(const ScalarFunction& f, const std::vector<Tensor>& params, double h = 1e-5);

inline double grad_check(const ScalarFunction& f, const std::vector<Tensor>& params, double h = 1e-5) {
  return grad_check_report(f, params, h).max_relative_error;
}

}  // namespace mlgan
