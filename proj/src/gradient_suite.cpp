#include "mlgan/gradient_suite.hpp"

#include <algorithm>
#include <functional>
#include <random>

#include "mlgan/grad_check.hpp"
#include "mlgan/losses.hpp"
#include "mlgan/nn.hpp"
#include "mlgan/random.hpp"

namespace mlgan {

namespace {

constexpr std::size_t kBatch = 4;

struct Instance {
  Mlp generator;
  Mlp discriminator;
  Mlp logit_net;
  Tensor real;
  Tensor noise;
  LossVariant center;
  LossVariant vanilla;
};

void jitter_biases(Mlp& net, Rng& rng) {
  for (auto* p : net.parameters())
    if (p->rank() == 1)
      for (double& b : p->data()) b = 0.1 * rng.normal();
}

Instance make_instance(Rng& rng) {
  std::uniform_int_distribution<std::size_t> small(2, 4), wide(3, 8), embed(2, 8);
  const std::size_t data_dim = small(rng.engine()), z_dim = small(rng.engine());
  const std::size_t hidden = wide(rng.engine()), d_dim = embed(rng.engine());
  Instance in;
  in.generator = Mlp::create({z_dim, hidden, hidden, data_dim}, Activation::leaky_relu, Activation::linear,
                             rng.engine()());
  in.discriminator = Mlp::create({data_dim, hidden, hidden, d_dim}, Activation::leaky_relu, Activation::linear,
                                 rng.engine()());
  in.logit_net = Mlp::create({data_dim, hidden, hidden, 1}, Activation::leaky_relu, Activation::linear,
                             rng.engine()());
  jitter_biases(in.generator, rng);
  jitter_biases(in.discriminator, rng);
  jitter_biases(in.logit_net, rng);
  in.real = Tensor({kBatch, data_dim});
  for (double& v : in.real.data()) v = 4.0 * rng.uniform() - 2.0;
  in.noise = rng.normal_matrix(kBatch, z_dim);
  in.vanilla = LossVariant::defaults(LossKind::vanilla, d_dim);
  in.center = LossVariant::defaults(LossKind::center_penalty, d_dim);
  in.center.mu_data[0] = 0.3;
  return in;
}

std::vector<Tensor> flatten(const Mlp& a, const Mlp& b) {
  std::vector<Tensor> out;
  for (const auto* p : a.parameters()) out.push_back(*p);
  for (const auto* p : b.parameters()) out.push_back(*p);
  return out;
}

using EmbeddingLoss = std::function<Var(Var real, Var fake)>;

// Loss of (D(x), D(G(z))) as a function of every generator and discriminator parameter.
ScalarFunction through_networks(const Instance& in, const Mlp& disc, EmbeddingLoss loss) {
  return [&in, &disc, loss](Tape& tape, std::span<const Var> params) {
    const std::size_t ng = in.generator.parameters().size();
    const auto gp = params.subspan(0, ng);
    const auto dp = params.subspan(ng);
    const Var fake = in.generator.forward(tape, gp, tape.constant(in.noise));
    const Var out_real = disc.forward(tape, dp, tape.constant(in.real));
    const Var out_fake = disc.forward(tape, dp, fake);
    return loss(out_real, out_fake);
  };
}

}  // namespace

std::vector<GradientCaseResult> run_gradient_suite(std::size_t instances, std::uint64_t seed, double h) {
  struct Case {
    std::string name;
    bool baseline;
    std::function<Var(const Instance&, Var, Var)> loss;
  };
  const std::vector<Case> cases = {
      {"l_intra", false, [](const Instance&, Var r, Var f) { return l_intra(r, f); }},
      {"l_inter", false, [](const Instance&, Var r, Var f) { return l_inter(r, f); }},
      {"loss_generator", false, [](const Instance&, Var r, Var f) { return loss_generator(r, f); }},
      {"l_center", false,
       [](const Instance& in, Var r, Var f) { return l_center(r, f, in.center.mu_data, in.center.mu_g); }},
      {"loss_discriminator_vanilla", false,
       [](const Instance& in, Var r, Var f) { return loss_discriminator(in.vanilla, r, f).total; }},
      {"loss_discriminator_center", false,
       [](const Instance& in, Var r, Var f) { return loss_discriminator(in.center, r, f).total; }},
      {"gan_baseline_d", true, [](const Instance&, Var r, Var f) { return loss_gan_baseline(r, f).d_loss; }},
      {"gan_baseline_g", true, [](const Instance&, Var r, Var f) { return loss_gan_baseline(r, f).g_loss; }},
  };

  std::vector<GradientCaseResult> results;
  for (const auto& c : cases) results.push_back({c.name, 0.0, 0});

  Rng rng(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const Instance in = make_instance(rng);
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const Mlp& disc = cases[k].baseline ? in.logit_net : in.discriminator;
      const auto& loss = cases[k].loss;
      const auto f = through_networks(in, disc, [&](Var r, Var fk) { return loss(in, r, fk); });
      const double err = grad_check(f, flatten(in.generator, disc), h);
      results[k].max_relative_error = std::max(results[k].max_relative_error, err);
      results[k].instances += 1;
    }
  }
  return results;
}

}  // namespace mlgan
