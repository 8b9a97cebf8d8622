#include "mlgan/mmc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mlgan/errors.hpp"

namespace mlgan::mmc {

namespace {

void require_dims(const Point& x, const Point& y, std::size_t n) {
  if (x.size() != n || y.size() != n)
    throw ShapeError("mahalanobis: point dimensions " + std::to_string(x.size()) + "/" + std::to_string(y.size()) +
                     " do not match metric dimension " + std::to_string(n));
}

// Per-pair squared coordinate differences, one row per pair.
Eigen::MatrixXd squared_deltas(const std::vector<PointPair>& pairs, std::size_t n) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pairs.size()), static_cast<Eigen::Index>(n));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    require_dims(pairs[p].first, pairs[p].second, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = pairs[p].first[k] - pairs[p].second[k];
      out(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = d * d;
    }
  }
  return out;
}

struct Problem {
  Eigen::VectorXd similar_total;  // sum over S of squared deltas, per coordinate
  Eigen::MatrixXd dissimilar;     // squared deltas of DS pairs

  // g, or +inf outside the log domain.
  double value(const Eigen::VectorXd& a) const {
    const double sim = similar_total.dot(a);
    const double spread = (dissimilar * a).cwiseMax(0.0).cwiseSqrt().sum();
    if (!(spread > 0.0)) return std::numeric_limits<double>::infinity();
    return sim - std::log(spread);
  }

  void derivatives(const Eigen::VectorXd& a, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::Index n = a.size();
    const Eigen::VectorXd dist = dissimilar * a;
    double spread = 0.0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd curv = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index p = 0; p < dissimilar.rows(); ++p) {
      if (!(dist(p) > 0.0)) continue;  // sqrt has no derivative at 0; such pairs contribute nothing
      const double s = std::sqrt(dist(p));
      spread += s;
      const Eigen::VectorXd row = dissimilar.row(p).transpose();
      u += row / (2.0 * s);
      curv += (row * row.transpose()) / (4.0 * s * s * s);
    }
    grad = similar_total - u / spread;
    hess = (u * u.transpose()) / (spread * spread) + curv / spread;
  }
};

Problem make_problem(const PairConstraints& c) {
  const std::size_t n = c.dim();
  Problem p;
  p.similar_total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (!c.similar.empty()) p.similar_total = squared_deltas(c.similar, n).colwise().sum().transpose();
  p.dissimilar = squared_deltas(c.dissimilar, n);
  return p;
}

}  // namespace

std::size_t PairConstraints::dim() const {
  if (dissimilar.empty()) throw std::invalid_argument("mmc: the dissimilar set must not be empty");
  const std::size_t n = dissimilar.front().first.size();
  if (n == 0) throw std::invalid_argument("mmc: points must have at least one coordinate");
  for (const auto* set : {&similar, &dissimilar})
    for (const auto& pr : *set)
      if (pr.first.size() != n || pr.second.size() != n)
        throw ShapeError("mmc: all points must have dimension " + std::to_string(n));
  return n;
}

double mahalanobis_sq(const Point& x, const Point& y, const DiagMetric& metric) {
  require_dims(x, y, metric.dim());
  double s = 0.0;
  for (std::size_t k = 0; k < metric.dim(); ++k) {
    if (metric.diag[k] < 0.0) throw DomainError("mahalanobis: diagonal entry " + std::to_string(k) + " is negative");
    const double d = x[k] - y[k];
    s += metric.diag[k] * d * d;
  }
  return s;
}

double mahalanobis_sq(const Point& x, const Point& y, const Tensor& metric) {
  if (metric.rank() != 2 || metric.rows() != metric.cols())
    throw ShapeError("mahalanobis: metric must be square, got " + shape_string(metric.shape()));
  const std::size_t n = metric.rows();
  require_dims(x, y, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (metric.at(i, i) < 0.0) throw DomainError("mahalanobis: metric has a negative diagonal entry");
    for (std::size_t j = 0; j < i; ++j)
      if (metric.at(i, j) != metric.at(j, i)) throw DomainError("mahalanobis: metric is not symmetric");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += (x[i] - y[i]) * metric.at(i, j) * (x[j] - y[j]);
  return s;
}

double objective(const DiagMetric& metric, const PairConstraints& constraints) {
  double sim = 0.0;
  for (const auto& p : constraints.similar) sim += mahalanobis_sq(p.first, p.second, metric);
  if (constraints.dissimilar.empty()) throw std::invalid_argument("mmc: the dissimilar set must not be empty");
  double spread = 0.0;
  for (const auto& p : constraints.dissimilar) spread += std::sqrt(mahalanobis_sq(p.first, p.second, metric));
  if (!(spread > 0.0)) throw DomainError("mmc objective: dissimilar pairs have zero spread under this metric");
  return sim - std::log(spread);
}

FitResult fit_diagonal(const PairConstraints& constraints, const FitOptions& options) {
  const Problem problem = make_problem(constraints);
  const Eigen::Index n = problem.similar_total.size();

  Eigen::VectorXd a = Eigen::VectorXd::Ones(n);
  double g = problem.value(a);
  if (!std::isfinite(g)) throw DomainError("mmc fit: dissimilar pairs have zero spread under the identity metric");

  FitResult result;
  result.history.push_back(g);
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    problem.derivatives(a, grad, hess);

    // Coordinates pinned at the boundary with an outward gradient stay fixed.
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < n; ++k)
      if (a(k) > 0.0 || grad(k) < 0.0) free.push_back(k);
    if (free.empty()) {
      result.converged = true;
      break;
    }

    const auto nf = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd h(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
      rhs(i) = -grad(free[i]);
      for (Eigen::Index j = 0; j < nf; ++j) h(i, j) = hess(free[i], free[j]);
      h(i, i) += options.hessian_ridge;
    }
    const Eigen::VectorXd newton = h.ldlt().solve(rhs);

    // Newton direction first; projected gradient when no halving of it descends.
    bool accepted = false;
    std::size_t clamped = 0;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < nf; ++i) dir(free[i]) = attempt == 0 ? newton(i) : rhs(i);
      double step = 1.0;
      for (std::size_t h_count = 0; h_count <= options.max_halvings; ++h_count, step *= 0.5) {
        Eigen::VectorXd trial = a + step * dir;
        std::size_t neg = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (trial(k) < 0.0) {
            trial(k) = 0.0;
            ++neg;
          }
        }
        const double gt = problem.value(trial);
        if (std::isfinite(gt) && gt < g) {
          accepted = true;
          a = trial;
          clamped = neg;
          const double delta = g - gt;
          g = gt;
          result.history.push_back(g);
          if (delta < options.tol) result.converged = true;
          break;
        }
      }
    }
    result.iterations = it + 1;
    result.clamped.push_back(clamped);
    if (!accepted) {
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }

  result.metric.diag.assign(a.data(), a.data() + n);
  return result;
}

}  // namespace mlgan::mmc
