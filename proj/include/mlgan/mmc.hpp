#pragma once

// Mahalanobis distances and the diagonal MMC metric-learning solver.
//
// The solver minimizes
//   g(A) = sum_{S} d_A(x, y) - log( sum_{DS} sqrt(d_A(x, y)) ),   A = diag(a) >= 0
// by projected, damped Newton iterations starting from the identity.

#include <cstddef>
#include <vector>

#include "mlgan/tensor.hpp"

namespace mlgan::mmc {

using Point = std::vector<double>;

struct PointPair {
  Point first;
  Point second;
};

struct DiagMetric {
  std::vector<double> diag;

  static DiagMetric identity(std::size_t n) { return {std::vector<double>(n, 1.0)}; }
  std::size_t dim() const { return diag.size(); }
};

struct PairConstraints {
  std::vector<PointPair> similar;
  std::vector<PointPair> dissimilar;

  /// Dimension shared by every point; throws if pairs disagree or the dissimilar set is empty.
  std::size_t dim() const;
};

/// (x - y)^T diag(a) (x - y). Throws on dimension mismatch or a negative entry.
double mahalanobis_sq(const Point& x, const Point& y, const DiagMetric& metric);
/// (x - y)^T A (x - y) for a full symmetric PSD matrix A [n, n].
double mahalanobis_sq(const Point& x, const Point& y, const Tensor& metric);

/// g(A). Throws DomainError when the dissimilar spread is zero (log 0).
double objective(const DiagMetric& metric, const PairConstraints& constraints);

struct FitOptions {
  std::size_t max_iters = 100;
  double tol = 1e-10;
  std::size_t max_halvings = 30;
  double hessian_ridge = 1e-8;
};

struct FitResult {
  DiagMetric metric;
  /// g at the start point followed by g after every accepted step.
  std::vector<double> history;
  std::size_t iterations = 0;
  /// Coordinates whose Newton proposal went negative and was projected to 0, per iteration.
  std::vector<std::size_t> clamped;
  bool converged = false;
};

FitResult fit_diagonal(const PairConstraints& constraints, const FitOptions& options = {});

}  // namespace mlgan::mmc
