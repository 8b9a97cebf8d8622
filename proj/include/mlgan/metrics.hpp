#pragma once

#include <cstdint>

#include "mlgan/mixture.hpp"
#include "mlgan/nn.hpp"
#include "mlgan/tensor.hpp"

namespace mlgan {

struct ModeCoverage {
  std::size_t modes_covered = 0;
  double high_quality_fraction = 0.0;
};

/// A mode is covered when at least one sample lies within radius_in_sigmas * sigma
/// of its center; the high-quality fraction counts samples within that radius
/// of any center.
ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& spec, double radius_in_sigmas = 3.0);

/// exp(mean_x KL(p(y|x) || p(y))) for class posteriors given row-wise, with
/// p(y) the row mean. Rows must be nonnegative and sum to 1 within 1e-9.
double classifier_score(const Tensor& class_probs);

/// Unbiased MMD^2 estimate with a Gaussian kernel of the given bandwidth.
/// Needs at least two rows on each side.
double mmd_rbf(const Tensor& a, const Tensor& b, double bandwidth);

/// Frozen mixture-component classifier used for the classifier score.
struct ModeClassifier {
  Mlp net;  ///< 2 -> 32 -> C logits
  double held_out_accuracy = 0.0;

  /// Row-wise softmax of the logits.
  Tensor predict_proba(const Tensor& points) const;
};

struct ClassifierOptions {
  std::size_t steps = 400;
  double learning_rate = 1e-2;
  double min_accuracy = 0.99;
};

/// Trains on n_train labeled samples and checks accuracy on a held-out set of
/// n_train / 4. Throws std::runtime_error when the accuracy target is missed and
/// std::invalid_argument for single-component specs.
ModeClassifier fit_mode_classifier(const MixtureSpec& spec, std::size_t n_train, std::uint64_t seed,
                                   const ClassifierOptions& options = {});

}  // namespace mlgan
