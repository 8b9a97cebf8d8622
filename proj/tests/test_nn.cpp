#include <gtest/gtest.h>

#include <cmath>

#include "mlgan/errors.hpp"
#include "mlgan/grad_check.hpp"
#include "mlgan/nn.hpp"
#include "mlgan/random.hpp"

using namespace mlgan;

TEST(Mlp, ShapesAndParameterNames) {
  const Mlp net = Mlp::create({2, 8, 8, 5}, Activation::leaky_relu, Activation::linear, 1);
  EXPECT_EQ(net.input_dim(), 2u);
  EXPECT_EQ(net.output_dim(), 5u);
  EXPECT_EQ(net.parameter_count(), 2u * 8 + 8 + 8 * 8 + 8 + 8 * 5 + 5);
  const auto p = net.params();
  EXPECT_EQ(p.size(), 6u);
  EXPECT_EQ(p.at("layer0.weight").shape(), (Shape{2, 8}));
  EXPECT_EQ(p.at("layer2.bias").shape(), (Shape{5}));
  EXPECT_EQ(net.forward(Tensor({3, 2}, 0.5)).shape(), (Shape{3, 5}));
}

TEST(Mlp, InitializationDeterministicAndScaled) {
  const Mlp a = Mlp::create({64, 256, 1}, Activation::relu, Activation::linear, 42);
  const Mlp b = Mlp::create({64, 256, 1}, Activation::relu, Activation::linear, 42);
  const Mlp c = Mlp::create({64, 256, 1}, Activation::relu, Activation::linear, 43);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  const Tensor& w = a.layers()[0].weight;
  double ss = 0.0;
  for (double v : w.data()) ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(w.size())), std::sqrt(2.0 / 64), 0.01);
  for (double v : a.layers()[0].bias.data()) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, TapeAndUntrackedForwardAgree) {
  const Mlp net = Mlp::create({3, 6, 2}, Activation::tanh, Activation::sigmoid, 5);
  Rng rng(1);
  const Tensor x = rng.normal_matrix(4, 3);
  Tape tape;
  auto bound = net.bind(tape, false);
  EXPECT_EQ(net.forward(tape, bound, tape.constant(x)).value(), net.forward(x));
}

TEST(Mlp, WidthMismatchThrows) {
  const Mlp net = Mlp::create({3, 4, 2}, Activation::relu, Activation::linear, 0);
  EXPECT_THROW(net.forward(Tensor({2, 4})), ShapeError);
}

TEST(Mlp, ParamsRoundTripAndValidation) {
  const Mlp a = Mlp::create({2, 4, 3}, Activation::leaky_relu, Activation::linear, 9);
  Mlp b = Mlp::create({2, 4, 3}, Activation::leaky_relu, Activation::linear, 10);
  b.load_params(a.params());
  EXPECT_TRUE(a == b);
  auto p = a.params();
  p.erase("layer1.bias");
  EXPECT_THROW(b.load_params(p), std::invalid_argument);
  p = a.params();
  p["layer1.bias"] = Tensor({4});
  EXPECT_THROW(b.load_params(p), ShapeError);
}

TEST(Mlp, GradientThroughNetwork) {
  const Mlp net = Mlp::create({3, 5, 5, 2}, Activation::tanh, Activation::linear, 11);
  std::vector<Tensor> params;
  for (const Tensor* t : net.parameters()) params.push_back(*t);
  Rng rng(2);
  const Tensor x = rng.normal_matrix(4, 3);
  ScalarFunction f = [&](Tape& tape, std::span<const Var> p) {
    return sum(square(net.forward(tape, std::vector<Var>(p.begin(), p.end()), tape.constant(x))));
  };
  EXPECT_LT(grad_check(f, params), 1e-7);
}

TEST(Activations, ParseAndName) {
  for (auto a : {Activation::linear, Activation::relu, Activation::leaky_relu, Activation::tanh, Activation::sigmoid})
    EXPECT_EQ(parse_activation(activation_name(a)), a);
  EXPECT_THROW(parse_activation("swish"), std::invalid_argument);
}

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
  Mlp net = Mlp::create({3, 4, 2}, Activation::tanh, Activation::linear, 1);
  for (Tensor* p : net.parameters())
    for (auto& v : p->data()) v = 0.0;
  EXPECT_EQ(net.forward(Tensor({5, 3}, 1.3)), Tensor({5, 2}, 0.0));
}

TEST(Mlp, IdentityLayer) {
  Mlp net = Mlp::create({3, 3}, Activation::relu, Activation::linear, 1);
  auto p = net.params();
  p["layer0.weight"] = Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  p["layer0.bias"] = Tensor({3}, 0.0);
  net.load_params(p);
  const Tensor x = Tensor::matrix({{1, -2, 3}, {0.5, 0, -7}});
  EXPECT_EQ(net.forward(x), x);
}

TEST(Mlp, RowPermutationEquivariance) {
  const Mlp net = Mlp::create({2, 16, 16, 4}, Activation::leaky_relu, Activation::linear, 3);
  Rng rng(4);
  const Tensor x = rng.normal_matrix(6, 2);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  Tensor xp({6, 2});
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 2; ++k) xp.at(i, k) = x.at(perm[i], k);
  const Tensor y = net.forward(x), yp = net.forward(xp);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(yp.at(i, k), y.at(perm[i], k));
}

TEST(Mlp, InvalidDimsRejected) {
  EXPECT_THROW(Mlp::create({2}, Activation::relu, Activation::linear, 0), std::invalid_argument);
  EXPECT_THROW(Mlp::create({2, 0, 1}, Activation::relu, Activation::linear, 0), std::invalid_argument);
}
