#include "mlgan/adam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlgan/errors.hpp"

namespace mlgan {

void AdamConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("adam: alpha must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("adam: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("adam: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be positive");
}

AdamState AdamState::zeros_like(std::span<const Tensor* const> params) {
  AdamState s;
  for (const Tensor* p : params) {
    s.first_moment.emplace_back(p->shape());
    s.second_moment.emplace_back(p->shape());
  }
  return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size())
    throw ShapeError("adam: parameter, gradient and state counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i]->shape() || state.first_moment[i].shape() != params[i]->shape())
      throw ShapeError("adam: gradient " + std::to_string(i) + " has shape " + shape_string(grads[i].shape()) +
                       ", parameter has " + shape_string(params[i]->shape()));
    if (!grads[i].all_finite()) throw NonFiniteError("adam: gradient " + std::to_string(i) + " is not finite");
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    const auto g = grads[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      p[k] -= config.alpha * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.epsilon);
    }
  }
}

void clip_weights(std::span<Tensor* const> params, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip_weights: c must be positive");
  for (Tensor* p : params)
    for (double& x : p->data()) x = std::clamp(x, -c, c);
}

}  // namespace mlgan
