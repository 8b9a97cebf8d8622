#include "mlgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mlgan/adam.hpp"
#include "mlgan/errors.hpp"
#include "mlgan/kernels.hpp"

namespace mlgan {

ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& spec, double radius_in_sigmas) {
  spec.validate();
  if (samples.rank() != 2 || samples.cols() != 2)
    throw ShapeError("mode_coverage: samples must be [n, 2], got " + shape_string(samples.shape()));
  const double r = radius_in_sigmas * spec.sigma;
  const double r2 = r * r;
  std::vector<bool> hit(spec.components(), false);
  std::size_t good = 0;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    bool near_any = false;
    for (std::size_t k = 0; k < spec.components(); ++k) {
      const double dx = samples.at(i, 0) - spec.centers[k][0];
      const double dy = samples.at(i, 1) - spec.centers[k][1];
      if (dx * dx + dy * dy <= r2) {
        hit[k] = true;
        near_any = true;
      }
    }
    good += near_any;
  }
  return {static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true)),
          static_cast<double>(good) / static_cast<double>(samples.rows())};
}

double classifier_score(const Tensor& class_probs) {
  if (class_probs.rank() != 2) throw ShapeError("classifier_score: expected [n, C] probabilities");
  const std::size_t n = class_probs.rows(), c = class_probs.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = class_probs.at(i, k);
      if (!(p >= 0.0)) throw std::invalid_argument("classifier_score: negative or NaN probability in row " + std::to_string(i));
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("classifier_score: row " + std::to_string(i) + " does not sum to 1");
  }
  // Extended-precision marginal: identical rows give back the row exactly.
  std::vector<double> marginal(c);
  for (std::size_t k = 0; k < c; ++k) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i) s += class_probs.at(i, k);
    marginal[k] = static_cast<double>(s / static_cast<long double>(n));
  }
  double mean_kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double kl = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = class_probs.at(i, k);
      if (p > 0.0) kl += p * std::log(p / marginal[k]);
    }
    mean_kl += kl;
  }
  mean_kl /= static_cast<double>(n);
  // KL >= 0; negative values are rounding noise.
  return std::exp(std::max(0.0, mean_kl));
}

double mmd_rbf(const Tensor& a, const Tensor& b, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_rbf: bandwidth must be positive");
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols())
    throw ShapeError("mmd_rbf: sample shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) +
                     " are incompatible");
  if (a.rows() < 2 || b.rows() < 2) throw std::invalid_argument("mmd_rbf: need at least two samples per set");

  // Fixed argument order makes the estimate exactly symmetric.
  const bool swap = std::tie(b.shape()[0], b.values()) < std::tie(a.shape()[0], a.values());
  const Tensor& x = swap ? b : a;
  const Tensor& y = swap ? a : b;
  const std::size_t n = x.rows(), m = y.rows(), d = x.cols();
  namespace kp = kernels::parallel;
  const double kxx = kp::rbf_sum(x.data(), n, x.data(), n, d, bandwidth, true);
  const double kyy = kp::rbf_sum(y.data(), m, y.data(), m, d, bandwidth, true);
  const double kxy = kp::rbf_sum(x.data(), n, y.data(), m, d, bandwidth, false);
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return kxx / (nn * (nn - 1.0)) + kyy / (mm * (mm - 1.0)) - 2.0 * kxy / (nn * mm);
}

Tensor ModeClassifier::predict_proba(const Tensor& points) const {
  Tape tape;
  const auto params = net.bind(tape, false);
  const Var logp = log_softmax_rows(net.forward(tape, params, tape.constant(points)));
  Tensor out = logp.value();
  for (double& v : out.data()) v = std::exp(v);
  return out;
}

namespace {

Tensor one_hot(const std::vector<std::size_t>& labels, std::size_t classes) {
  Tensor out({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) out.at(i, labels[i]) = 1.0;
  return out;
}

double accuracy(const ModeClassifier& clf, const LabeledSamples& data) {
  const Tensor probs = clf.predict_proba(data.points);
  const std::size_t c = probs.cols();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const double* row = &probs.data()[i * c];
    correct += static_cast<std::size_t>(std::max_element(row, row + c) - row) == data.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

}  // namespace

ModeClassifier fit_mode_classifier(const MixtureSpec& spec, std::size_t n_train, std::uint64_t seed,
                                   const ClassifierOptions& options) {
  spec.validate();
  const std::size_t classes = spec.components();
  if (classes < 2) throw std::invalid_argument("fit_mode_classifier: need at least two mixture components");
  if (n_train < 4) throw std::invalid_argument("fit_mode_classifier: n_train too small");

  Rng rng(seed);
  const LabeledSamples train = sample_mixture_labeled(spec, n_train, rng);
  const LabeledSamples held_out = sample_mixture_labeled(spec, std::max<std::size_t>(n_train / 4, 1), rng);
  const Tensor targets = one_hot(train.labels, classes);

  ModeClassifier clf;
  clf.net = Mlp::create({2, 32, classes}, Activation::leaky_relu, Activation::linear, seed ^ 0x9E3779B97F4A7C15ull);
  AdamConfig adam{options.learning_rate, 0.9, 0.999, 1e-8};
  AdamState state = AdamState::zeros_like(std::as_const(clf.net).parameters());
  const double inv_n = 1.0 / static_cast<double>(n_train);

  for (std::size_t step = 0; step < options.steps; ++step) {
    Tape tape;
    const auto params = clf.net.bind(tape, true);
    const Var logp = log_softmax_rows(clf.net.forward(tape, params, tape.constant(train.points)));
    const Var loss = scale(sum(mul(logp, tape.constant(targets))), -inv_n);
    const auto grads = tape.backward(loss);
    std::vector<Tensor> g;
    for (Var p : params) g.push_back(grads[p]);
    adam_step(clf.net.parameters(), g, state, adam);
  }

  clf.held_out_accuracy = accuracy(clf, held_out);
  if (clf.held_out_accuracy < options.min_accuracy)
    throw std::runtime_error("fit_mode_classifier: held-out accuracy " + std::to_string(clf.held_out_accuracy) +
                             " is below " + std::to_string(options.min_accuracy) +
                             "; increase the separation between mixture components");
  return clf;
}

}  // namespace mlgan
