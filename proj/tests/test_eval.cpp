#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mlgan/image_grid.hpp"
#include "mlgan/metrics.hpp"
#include "mlgan/mixture.hpp"
#include "oracles.hpp"

using namespace mlgan;

namespace {

Tensor rows_of(const std::vector<std::array<double, 2>>& pts) {
  Tensor t({pts.size(), 2});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.at(i, 0) = pts[i][0];
    t.at(i, 1) = pts[i][1];
  }
  return t;
}

}  // namespace

TEST(Mixture, RingFrequencies) {
  const auto spec = MixtureSpec::ring();
  Rng rng(11);
  const auto s = sample_mixture_labeled(spec, 8000, rng);
  std::vector<std::size_t> counts(8, 0);
  for (auto l : s.labels) ++counts[l];
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), 1000.0, 150.0);
}

TEST(Mixture, DeterministicAndDegenerate) {
  const auto spec = MixtureSpec::ring();
  EXPECT_EQ(sample_mixture(spec, 50, 3), sample_mixture(spec, 50, 3));
  MixtureSpec point{{{1.5, -2.0}}, 1e-300, {1.0}};
  const Tensor t = sample_mixture(point, 10, 1);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(t.at(i, 0), 1.5);
    EXPECT_EQ(t.at(i, 1), -2.0);
  }
}

TEST(Mixture, InvalidSpecRejected) {
  MixtureSpec bad{{{0, 0}, {1, 1}}, 0.1, {0.5, 0.6}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.weights = {1.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = MixtureSpec::ring();
  bad.sigma = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(ModeCoverage, HandCases) {
  const auto spec = MixtureSpec::ring();
  std::vector<std::array<double, 2>> centers(spec.centers.begin(), spec.centers.end());
  auto all = mode_coverage(rows_of(centers), spec);
  EXPECT_EQ(all.modes_covered, 8u);
  EXPECT_DOUBLE_EQ(all.high_quality_fraction, 1.0);

  auto far = mode_coverage(rows_of({{10, 10}, {-10, 3}}), spec);
  EXPECT_EQ(far.modes_covered, 0u);
  EXPECT_EQ(far.high_quality_fraction, 0.0);

  const auto c = spec.centers[0];
  auto half = mode_coverage(rows_of({c, c, {0, 0}, {0, 0}}), spec);
  EXPECT_EQ(half.modes_covered, 1u);
  EXPECT_DOUBLE_EQ(half.high_quality_fraction, 0.5);
}

TEST(ModeCoverage, AddingSamplesNeverLosesModes) {
  const auto spec = MixtureSpec::ring();
  Rng rng(5);
  Tensor pts = rng.normal_matrix(200, 2);
  for (auto& v : pts.data()) v *= 2.0;
  std::size_t prev = 0;
  for (std::size_t n = 10; n <= 200; n += 10) {
    std::vector<double> head(pts.data().begin(), pts.data().begin() + static_cast<std::ptrdiff_t>(2 * n));
    const auto cov = mode_coverage(Tensor({n, 2}, head), spec);
    EXPECT_GE(cov.modes_covered, prev);
    prev = cov.modes_covered;
  }
}

TEST(ClassifierScore, FormulaCases) {
  EXPECT_EQ(classifier_score(Tensor({7, 4}, 0.25)), 1.0);
  Tensor onehot({12, 4}, 0.0);
  for (std::size_t i = 0; i < 12; ++i) onehot.at(i, i % 4) = 1.0;
  EXPECT_NEAR(classifier_score(onehot), 4.0, 1e-9);
  Tensor same({5, 3}, 0.0);
  for (std::size_t i = 0; i < 5; ++i) same.at(i, 1) = 1.0;
  EXPECT_NEAR(classifier_score(same), 1.0, 1e-12);
}

TEST(ClassifierScore, MatchesOracleAndBounds) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(30), c = 2 + rng.index(8);
    Tensor p({n, c});
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += p.at(i, k) = std::exp(3 * rng.normal());
      for (std::size_t k = 0; k < c; ++k) p.at(i, k) /= s;
    }
    const double score = classifier_score(p);
    EXPECT_NEAR(score, oracle::classifier_score(p), 1e-10);
    EXPECT_GE(score, 1.0);
    EXPECT_LE(score, static_cast<double>(c) + 1e-12);
  }
}

TEST(ClassifierScore, InvalidRowsRejected) {
  EXPECT_THROW(classifier_score(Tensor::matrix({{0.5, 0.6}})), std::invalid_argument);
  EXPECT_THROW(classifier_score(Tensor::matrix({{1.5, -0.5}})), std::invalid_argument);
}

TEST(Mmd, MatchesOracleAndSymmetric) {
  Rng rng(7);
  const Tensor a = rng.normal_matrix(30, 3), b = rng.normal_matrix(20, 3);
  EXPECT_NEAR(mmd_rbf(a, b, 0.8), oracle::mmd_rbf(a, b, 0.8), 1e-12);
  EXPECT_EQ(mmd_rbf(a, b, 0.8), mmd_rbf(b, a, 0.8));
}

TEST(Mmd, SameDistributionNearZero) {
  const auto spec = MixtureSpec::ring();
  const Tensor s = sample_mixture(spec, 4000, 9);
  std::vector<double> v(s.data().begin(), s.data().end());
  const Tensor a({2000, 2}, std::vector<double>(v.begin(), v.begin() + 4000));
  const Tensor b({2000, 2}, std::vector<double>(v.begin() + 4000, v.end()));
  EXPECT_LT(std::abs(mmd_rbf(a, b, 0.5)), 0.01);
}

TEST(Mmd, DistantPointMasses) {
  const Tensor a({5, 2}, 0.0), b({5, 2}, 10.0);
  EXPECT_NEAR(mmd_rbf(a, b, 0.5), oracle::mmd_rbf(a, b, 0.5), 1e-12);
  EXPECT_NEAR(mmd_rbf(a, b, 0.5), 2.0, 1e-12);
}

TEST(Mmd, TooFewRowsRejected) {
  EXPECT_THROW(mmd_rbf(Tensor({1, 2}), Tensor({3, 2}), 1.0), std::invalid_argument);
  EXPECT_THROW(mmd_rbf(Tensor({3, 2}), Tensor({3, 2}), 0.0), std::invalid_argument);
}

TEST(ModeClassifierFit, RingAccuracyAndDeterminism) {
  const auto spec = MixtureSpec::ring();
  const auto a = fit_mode_classifier(spec, 4000, 12345);
  EXPECT_GE(a.held_out_accuracy, 0.99);
  const auto b = fit_mode_classifier(spec, 4000, 12345);
  EXPECT_TRUE(a.net == b.net);
  // Data drawn from the mixture itself scores close to the number of modes.
  EXPECT_GT(classifier_score(a.predict_proba(sample_mixture(spec, 2000, 1))), 7.5);
}

TEST(ModeClassifierFit, SingleComponentRejected) {
  MixtureSpec one{{{0, 0}}, 0.1, {1.0}};
  EXPECT_THROW(fit_mode_classifier(one, 100, 1), std::invalid_argument);
}

TEST(ImageGrid, RoundTripAndScaling) {
  ImageGrid g{3, 2, 2, {0, 255, 128, 0, 0, 0, 255, 255, 255, 255, 255, 255}};
  const auto path = std::filesystem::temp_directory_path() / "mlgan_grid_test.bin";
  write_image_grid(g, path);
  const ImageGrid back = read_image_grid(path);
  EXPECT_EQ(back.width, 3u);
  EXPECT_EQ(back.height, 2u);
  EXPECT_EQ(back.pixels, g.pixels);
  const Tensor t = image_grid_to_tensor(back);
  EXPECT_EQ(t.shape(), (Shape{2, 6}));
  EXPECT_EQ(t.at(0, 0), -1.0);
  EXPECT_EQ(t.at(0, 1), 1.0);
  Rng rng(1);
  EXPECT_EQ(sample_images(back, 5, rng).shape(), (Shape{5, 6}));
}

TEST(ImageGrid, TruncatedFileRejected) {
  const auto path = std::filesystem::temp_directory_path() / "mlgan_grid_bad.bin";
  ImageGrid g{2, 2, 3, std::vector<std::uint8_t>(12, 7)};
  write_image_grid(g, path);
  std::filesystem::resize_file(path, 12 + 5);
  EXPECT_THROW(read_image_grid(path), std::runtime_error);
}
