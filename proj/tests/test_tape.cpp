#include <gtest/gtest.h>

#include <cmath>

#include "mlgan/errors.hpp"
#include "mlgan/grad_check.hpp"
#include "mlgan/random.hpp"
#include "mlgan/tape.hpp"

using namespace mlgan;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double offset = 0.0) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.normal() + offset;
  return t;
}

// Keeps values away from the kinks of abs/relu so finite differences are meaningful.
Tensor away_from_zero(Shape shape, std::uint64_t seed) {
  Tensor t = random_tensor(std::move(shape), seed);
  for (auto& v : t.data()) v += v >= 0 ? 0.2 : -0.2;
  return t;
}

}  // namespace

TEST(Tape, ScalarRootRequired) {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({1, 2}));
  EXPECT_THROW(tape.backward(x), ShapeError);
}

TEST(Tape, UntouchedNodesGetZeroGradient) {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({1, 2}));
  Var y = tape.leaf(Tensor::vector({3, 4}));
  auto g = tape.backward(sum(square(x)));
  EXPECT_EQ(g[x], Tensor::vector({2, 4}));
  EXPECT_EQ(g[y], Tensor::vector({0, 0}));
}

TEST(Tape, SharedSubexpressionAccumulates) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(3.0));
  Var y = x * x + x;
  EXPECT_DOUBLE_EQ(tape.backward(y)[x].item(), 7.0);
}

TEST(Tape, DomainErrors) {
  Tape tape;
  EXPECT_THROW(log(tape.leaf(Tensor::vector({1.0, 0.0}))), DomainError);
  EXPECT_THROW(sqrt(tape.leaf(Tensor::vector({-1e-3}))), DomainError);
}

TEST(Tape, NonFiniteOutputThrows) {
  Tape tape;
  EXPECT_THROW(exp(tape.leaf(Tensor::scalar(1000.0))), NonFiniteError);
}

TEST(Tape, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.leaf(Tensor({2, 3}));
  Var b = tape.leaf(Tensor({3, 2}));
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(Tape, SubgradientConventionsAtZero) {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({0.0, 0.0, 0.0}));
  auto g = tape.backward(sum(abs(x)) + sum(relu(x)));
  EXPECT_EQ(g[x], Tensor::vector({0, 0, 0}));
  Tape t2;
  Var z = t2.leaf(Tensor::scalar(0.0));
  EXPECT_DOUBLE_EQ(t2.backward(sqrt(z))[z].item(), 0.0);
  EXPECT_DOUBLE_EQ(t2.backward(leaky_relu(z, 0.2))[z].item(), 0.2);
}

struct OpCase {
  const char* name;
  ScalarFunction f;
  std::vector<Tensor> params;
};

class OpGradient : public ::testing::TestWithParam<int> {};

std::vector<OpCase> op_cases() {
  const Shape s{3, 4};
  return {
      {"add_sub_mul", [](Tape&, std::span<const Var> p) { return sum((p[0] + p[1]) * (p[0] - p[1]) * p[0]); },
       {random_tensor(s, 1), random_tensor(s, 2)}},
      {"broadcast_scalar", [](Tape&, std::span<const Var> p) { return sum(p[0] * p[1] + p[1]); },
       {random_tensor(s, 3), random_tensor({}, 4)}},
      {"matmul", [](Tape&, std::span<const Var> p) { return sum(square(matmul(p[0], p[1]))); },
       {random_tensor({3, 5}, 5), random_tensor({5, 2}, 6)}},
      {"activations",
       [](Tape&, std::span<const Var> p) {
         return sum(leaky_relu(p[0], 0.2) + relu(p[0]) + tanh(p[0]) + sigmoid(p[0]) + abs(p[0]));
       },
       {away_from_zero(s, 7)}},
      {"exp_log_sqrt", [](Tape&, std::span<const Var> p) { return sum(log(exp(p[0]) + sqrt(square(p[0]) + p[1]))); },
       {random_tensor(s, 8), random_tensor(s, 9, 5.0)}},
      {"softplus_mean_scale", [](Tape&, std::span<const Var> p) { return mean(3.0 * softplus(p[0])); },
       {random_tensor(s, 10)}},
      {"concat_add_row", [](Tape&, std::span<const Var> p) { return sum(square(add_row(concat_rows(p[0], p[1]), p[2]))); },
       {random_tensor({2, 3}, 11), random_tensor({4, 3}, 12), random_tensor({3}, 13)}},
      {"log_softmax_rows", [](Tape&, std::span<const Var> p) { return sum(log_softmax_rows(p[0]) * p[1]); },
       {random_tensor(s, 14), random_tensor(s, 15)}},
      {"pair_sqdist_sum", [](Tape&, std::span<const Var> p) { return pair_sqdist_sum(p[0]); }, {random_tensor({5, 3}, 16)}},
      {"cross_l1_sum", [](Tape&, std::span<const Var> p) { return cross_l1_sum(p[0], p[1]); },
       {random_tensor({4, 3}, 17), random_tensor({3, 3}, 18, 0.5)}},
  };
}

TEST_P(OpGradient, MatchesFiniteDifferences) {
  const auto c = op_cases().at(static_cast<std::size_t>(GetParam()));
  SCOPED_TRACE(c.name);
  EXPECT_LT(grad_check(c.f, c.params), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Ops, OpGradient, ::testing::Range(0, 10));

// The checker must notice a wrong backward rule.
TEST(GradCheck, DetectsCorruptedBackward) {
  ScalarFunction corrupt = [](Tape& tape, std::span<const Var> p) {
    Var s = sum(square(p[0]));
    return tape.custom("bad_identity", {s}, s.value(),
                       [](const Tensor& g, std::span<const Tensor* const>, const Tensor&) {
                         return std::vector<Tensor>{Tensor::scalar(1.05 * g.item())};
                       });
  };
  const Tensor x = random_tensor({3, 2}, 21);
  EXPECT_GT(grad_check(corrupt, {x}), 1e-2);

  ScalarFunction correct = [](Tape& tape, std::span<const Var> p) {
    Var s = sum(square(p[0]));
    return tape.custom("identity", {s}, s.value(),
                       [](const Tensor& g, std::span<const Tensor* const>, const Tensor&) {
                         return std::vector<Tensor>{g};
                       });
  };
  EXPECT_LT(grad_check(correct, {x}), 1e-7);
}

TEST(Tape, HandValues) {
  Tape tape;
  Var a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  Var b = tape.constant(Tensor::matrix({{1}, {1}}));
  EXPECT_EQ(matmul(a, b).value(), Tensor::matrix({{3}, {7}}));
  EXPECT_EQ(abs(tape.constant(Tensor::scalar(-3.0))).value().item(), 3.0);
  EXPECT_EQ(sum(square(tape.constant(Tensor::vector({1, 2, 3})))).value().item(), 14.0);
  Var x = tape.leaf(Tensor::vector({-3.0}));
  EXPECT_EQ(tape.backward(sum(abs(x)))[x], Tensor::vector({-1.0}));
}

TEST(GradCheck, LinearFunctionIsExact) {
  ScalarFunction f = [](Tape&, std::span<const Var> p) { return sum(p[0]); };
  EXPECT_LT(grad_check(f, {random_tensor({4, 3}, 30)}), 1e-10);
}

TEST(GradCheck, NonFiniteProbeThrows) {
  ScalarFunction f = [](Tape&, std::span<const Var> p) { return sum(exp(scale(p[0], 800.0))); };
  EXPECT_THROW(grad_check(f, {Tensor::vector({0.8875})}), NonFiniteError);
}

// Every op, 100 random inputs drawn from [-2, 2] (shifted into the domain for log and sqrt).
TEST(OpGradientProperty, RandomInputsInBox) {
  Rng rng(99);
  auto uniform = [&](Shape s, bool positive = false) {
    Tensor t(std::move(s));
    for (auto& v : t.data()) {
      v = -2.0 + 4.0 * rng.uniform();
      if (positive) v = 0.05 + std::abs(v) * 0.975;
    }
    return t;
  };
  using F = ScalarFunction;
  const std::vector<std::pair<const char*, F>> unary = {
      {"leaky_relu", [](Tape&, std::span<const Var> p) { return sum(leaky_relu(p[0], 0.2)); }},
      {"relu", [](Tape&, std::span<const Var> p) { return sum(relu(p[0])); }},
      {"tanh", [](Tape&, std::span<const Var> p) { return sum(tanh(p[0])); }},
      {"sigmoid", [](Tape&, std::span<const Var> p) { return sum(sigmoid(p[0])); }},
      {"exp", [](Tape&, std::span<const Var> p) { return sum(exp(p[0])); }},
      {"square", [](Tape&, std::span<const Var> p) { return sum(square(p[0])); }},
      {"abs", [](Tape&, std::span<const Var> p) { return sum(abs(p[0])); }},
      {"softplus", [](Tape&, std::span<const Var> p) { return sum(softplus(p[0])); }},
      {"mean", [](Tape&, std::span<const Var> p) { return mean(square(p[0])); }},
      {"scale", [](Tape&, std::span<const Var> p) { return sum(square(scale(p[0], -1.7))); }},
      {"log_softmax_rows", [](Tape&, std::span<const Var> p) { return sum(square(log_softmax_rows(p[0]))); }},
      {"pair_sqdist_sum", [](Tape&, std::span<const Var> p) { return pair_sqdist_sum(p[0]); }},
  };
  const std::vector<std::pair<const char*, F>> binary = {
      {"add", [](Tape&, std::span<const Var> p) { return sum(square(p[0] + p[1])); }},
      {"sub", [](Tape&, std::span<const Var> p) { return sum(square(p[0] - p[1])); }},
      {"mul", [](Tape&, std::span<const Var> p) { return sum(p[0] * p[1]); }},
      {"concat_rows", [](Tape&, std::span<const Var> p) { return sum(square(concat_rows(p[0], p[1]))); }},
      {"cross_l1_sum", [](Tape&, std::span<const Var> p) { return cross_l1_sum(p[0], p[1]); }},
  };
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (const auto& [name, f] : unary) worst = std::max(worst, grad_check(f, {uniform({3, 4})}));
    for (const auto& [name, f] : binary) worst = std::max(worst, grad_check(f, {uniform({3, 4}), uniform({3, 4})}));
    worst = std::max(worst, grad_check([](Tape&, std::span<const Var> p) { return sum(log(p[0])); }, {uniform({3, 4}, true)}));
    worst = std::max(worst, grad_check([](Tape&, std::span<const Var> p) { return sum(sqrt(p[0])); }, {uniform({3, 4}, true)}));
    worst = std::max(worst, grad_check([](Tape&, std::span<const Var> p) { return sum(square(matmul(p[0], p[1]))); },
                                       {uniform({3, 4}), uniform({4, 2})}));
    worst = std::max(worst, grad_check([](Tape&, std::span<const Var> p) { return sum(square(add_row(p[0], p[1]))); },
                                       {uniform({3, 4}), uniform({4})}));
    worst = std::max(worst, grad_check([](Tape&, std::span<const Var> p) { return sum(square(p[0] * p[1])); },
                                       {uniform({3, 4}), uniform({})}));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Tape, BackwardIsLinear) {
  const Tensor x0 = random_tensor({4, 3}, 40), w0 = random_tensor({3, 2}, 41);
  auto grad_of = [&](double a, double b) {
    Tape tape;
    Var x = tape.leaf(x0);
    Var w = tape.constant(w0);
    Var f = sum(tanh(matmul(x, w)));
    Var g = pair_sqdist_sum(x) + sum(abs(x));
    return tape.backward(a * f + b * g)[x];
  };
  const double a = 1.7, b = -0.6;
  const Tensor gf = grad_of(1, 0), gg = grad_of(0, 1), gc = grad_of(a, b);
  for (std::size_t i = 0; i < gc.size(); ++i) EXPECT_NEAR(gc[i], a * gf[i] + b * gg[i], 1e-10);
}

TEST(Tape, ReplayIsBitIdentical) {
  auto run = [] {
    Tape tape;
    Var x = tape.leaf(random_tensor({5, 4}, 50));
    Var w = tape.leaf(random_tensor({4, 3}, 51));
    Var loss = pair_sqdist_sum(leaky_relu(matmul(x, w), 0.2)) - 0.5 * sum(abs(x));
    auto g = tape.backward(loss);
    return std::vector<Tensor>{loss.value(), g[x], g[w]};
  };
  EXPECT_EQ(run(), run());
}
