#include "mlgan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlgan/errors.hpp"

namespace mlgan {

namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.constant(p));
  const double v = f(tape, leaves).value().item();
  if (!std::isfinite(v)) throw NonFiniteError("grad_check: function is non-finite at a probe point");
  return v;
}

}  // namespace

GradCheckReport grad_check_report(const ScalarFunction& f, const std::vector<Tensor>& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.leaf(p));
  const Var root = f(tape, leaves);
  if (!std::isfinite(root.value().item())) throw NonFiniteError("grad_check: function is non-finite");
  const GradientMap grads = tape.backward(root);

  GradCheckReport report;
  std::vector<Tensor> probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Tensor& analytic = grads[leaves[p]];
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double x0 = params[p][i];
      probe[p][i] = x0 + h;
      const double up = evaluate(f, probe);
      probe[p][i] = x0 - h;
      const double down = evaluate(f, probe);
      probe[p][i] = x0;

      const double numeric = (up - down) / (2.0 * h);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_param = p;
        report.worst_index = i;
      }
      ++report.coordinates;
    }
  }
  return report;
}

}  // namespace mlgan
