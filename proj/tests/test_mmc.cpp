#include <gtest/gtest.h>

#include <cmath>

#include "mlgan/errors.hpp"
#include "mlgan/mmc.hpp"
#include "mlgan/random.hpp"
#include "oracles.hpp"

using namespace mlgan;
using namespace mlgan::mmc;

namespace {

PairConstraints random_instance(Rng& rng, std::size_t n) {
  PairConstraints c;
  auto point = [&] {
    Point p(n);
    for (auto& v : p) v = rng.normal();
    return p;
  };
  const std::size_t ns = 2 + rng.index(4), nd = 2 + rng.index(4);
  for (std::size_t i = 0; i < ns; ++i) c.similar.push_back({point(), point()});
  for (std::size_t i = 0; i < nd; ++i) c.dissimilar.push_back({point(), point()});
  return c;
}

}  // namespace

TEST(Mahalanobis, DiagonalHandValue) {
  EXPECT_DOUBLE_EQ(mahalanobis_sq({1, 3}, {0, 0}, DiagMetric{{2, 0}}), 2.0);
}

TEST(Mahalanobis, IdentityIsSquaredEuclidean) {
  EXPECT_DOUBLE_EQ(mahalanobis_sq({1, 2, 3}, {3, 2, 0}, DiagMetric::identity(3)), 13.0);
  EXPECT_DOUBLE_EQ(mahalanobis_sq({1, 2}, {0, 0}, Tensor::matrix({{1, 0}, {0, 1}})), 5.0);
}

TEST(Mahalanobis, FullMatrix) {
  EXPECT_DOUBLE_EQ(mahalanobis_sq({1, 1}, {0, 0}, Tensor::matrix({{2, 1}, {1, 3}})), 7.0);
}

TEST(Mahalanobis, Errors) {
  EXPECT_THROW(mahalanobis_sq({1, 2}, {1}, DiagMetric::identity(2)), ShapeError);
  EXPECT_THROW(mahalanobis_sq({1, 2}, {1, 0}, DiagMetric{{1, -1}}), DomainError);
  EXPECT_THROW(mahalanobis_sq({1, 2}, {1, 0}, Tensor::matrix({{1, 0.5}, {0, 1}})), DomainError);
}

TEST(MmcObjective, HandValue) {
  PairConstraints c;
  c.similar = {{{0}, {1}}};
  c.dissimilar = {{{0}, {2}}};
  EXPECT_NEAR(objective(DiagMetric::identity(1), c), 1.0 - std::log(2.0), 1e-15);
}

TEST(MmcObjective, ZeroSpreadIsDomainError) {
  PairConstraints c;
  c.similar = {{{0, 0}, {1, 1}}};
  c.dissimilar = {{{0, 0}, {0, 1}}};
  EXPECT_THROW(objective(DiagMetric{{1, 0}}, c), DomainError);
  c.dissimilar.clear();
  EXPECT_THROW(objective(DiagMetric::identity(2), c), std::invalid_argument);
}

TEST(MmcObjective, MatchesOracle) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto c = random_instance(rng, 3);
    std::vector<double> a{rng.uniform(), rng.uniform(), rng.uniform()};
    EXPECT_NEAR(objective(DiagMetric{a}, c), oracle::mmc_objective(a, c), 1e-12);
  }
}

TEST(MmcFit, OneDimensionalClosedForm) {
  // g(a) = a S - log(sqrt(a) D) is minimized at a = 1 / (2 S).
  PairConstraints c;
  c.similar = {{{0}, {1}}, {{0}, {0.5}}};
  c.dissimilar = {{{0}, {3}}};
  const auto r = fit_diagonal(c);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.metric.diag[0], 1.0 / (2 * 1.25), 1e-8);
}

TEST(MmcFit, BeatsGridAndNeverIncreases) {
  Rng rng(77);
  for (int i = 0; i < 15; ++i) {
    const std::size_t n = 1 + rng.index(3);
    const auto c = random_instance(rng, n);
    const auto r = fit_diagonal(c);
    for (std::size_t k = 1; k < r.history.size(); ++k) EXPECT_LE(r.history[k], r.history[k - 1]);
    for (double a : r.metric.diag) EXPECT_GE(a, 0.0);
    EXPECT_NEAR(r.history.back(), objective(r.metric, c), 1e-12);
    const double grid = oracle::mmc_grid_min(c, oracle::mmc_box(c, n), n == 3 ? 61 : 201);
    EXPECT_LE(r.history.back(), grid + 1e-3);
  }
}

TEST(MmcFit, NoiseCoordinateIsSuppressed) {
  // Coordinate 1 only adds similar-pair spread, so its weight is driven to the boundary.
  PairConstraints c;
  c.similar = {{{0, 0}, {0.1, 1}}, {{1, 0}, {1.1, -1}}};
  c.dissimilar = {{{0, 0}, {1, 0.1}}, {{1, 0}, {2, -0.1}}};
  const auto r = fit_diagonal(c);
  EXPECT_GT(r.metric.diag[0], 1.0);
  EXPECT_LT(r.metric.diag[1], 1e-6);
}
