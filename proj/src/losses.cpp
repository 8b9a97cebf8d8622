#include "mlgan/losses.hpp"

#include <stdexcept>
#include <string>

#include "mlgan/errors.hpp"

namespace mlgan {

namespace {

void require_matrix(Var v, std::string_view what) {
  if (v.shape().size() != 2)
    throw ShapeError(std::string(what) + ": expected an [m, d] embedding batch, got " + shape_string(v.shape()));
}

void require_same_width(Var a, Var b, std::string_view what) {
  require_matrix(a, what);
  require_matrix(b, what);
  if (a.shape()[1] != b.shape()[1])
    throw ShapeError(std::string(what) + ": embedding widths differ " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

Var normalized(Var total, std::size_t count, bool normalize) {
  if (!normalize || count <= 1) return total;
  return scale(total, 1.0 / static_cast<double>(count));
}

Var center_term(Var emb, std::span<const double> mu) {
  if (emb.shape()[1] != mu.size())
    throw ShapeError("l_center: embedding width " + std::to_string(emb.shape()[1]) + " does not match center of size " +
                     std::to_string(mu.size()));
  std::vector<double> neg(mu.begin(), mu.end());
  for (double& v : neg) v = -v;
  Var shift = emb.tape().constant(Tensor::vector(std::move(neg)));
  return sum(square(add_row(emb, shift)));
}

}  // namespace

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::vanilla: return "vanilla";
    case LossKind::clipping: return "clipping";
    case LossKind::center_penalty: return "center_penalty";
  }
  return "vanilla";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "vanilla") return LossKind::vanilla;
  if (name == "clipping") return LossKind::clipping;
  if (name == "center_penalty" || name == "center") return LossKind::center_penalty;
  throw std::invalid_argument("unknown loss variant '" + std::string(name) + "'");
}

LossVariant LossVariant::defaults(LossKind kind, std::size_t d_dim) {
  LossVariant v;
  v.kind = kind;
  v.lambda = kind == LossKind::center_penalty ? 1.0 : 0.5;
  v.beta = 10.0;
  v.mu_data.assign(d_dim, d_dim ? 1.0 / static_cast<double>(d_dim) : 0.0);
  v.mu_g.assign(d_dim, 0.0);
  return v;
}

void LossVariant::validate(std::size_t d_dim) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("loss variant: lambda must be positive");
  if (!(beta >= 0.0)) throw std::invalid_argument("loss variant: beta must be nonnegative");
  if (kind == LossKind::center_penalty && (mu_data.size() != d_dim || mu_g.size() != d_dim))
    throw std::invalid_argument("loss variant: centers must have d_dim = " + std::to_string(d_dim) + " entries");
}

std::size_t intra_pair_count(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

std::size_t inter_pair_count(std::size_t m, const PairScheme& scheme) {
  return scheme.inter == InterPairing::full_cross ? m * m : m;
}

Var l_intra(Var real, Var fake, const PairScheme& scheme) {
  require_same_width(real, fake, "l_intra");
  Var r = normalized(pair_sqdist_sum(real), intra_pair_count(real.shape()[0]), scheme.normalize);
  Var f = normalized(pair_sqdist_sum(fake), intra_pair_count(fake.shape()[0]), scheme.normalize);
  return add(r, f);
}

Var l_inter(Var real, Var fake, const PairScheme& scheme) {
  require_same_width(real, fake, "l_inter");
  const std::size_t m = real.shape()[0];
  if (scheme.inter == InterPairing::full_cross) {
    const std::size_t pairs = m * fake.shape()[0];
    return normalized(cross_l1_sum(real, fake), pairs, scheme.normalize);
  }
  if (fake.shape()[0] != m)
    throw ShapeError("l_inter: batch sizes differ " + shape_string(real.shape()) + " vs " + shape_string(fake.shape()));
  return normalized(sum(abs(sub(real, fake))), m, scheme.normalize);
}

Var l_center(Var real, Var fake, std::span<const double> mu_data, std::span<const double> mu_g) {
  require_same_width(real, fake, "l_center");
  return add(center_term(real, mu_data), center_term(fake, mu_g));
}

DiscriminatorLoss loss_discriminator(const LossVariant& variant, Var real, Var fake, const PairScheme& scheme) {
  require_same_width(real, fake, "loss_discriminator");
  variant.validate(real.shape()[1]);
  DiscriminatorLoss out;
  out.intra = l_intra(real, fake, scheme);
  out.inter = l_inter(real, fake, scheme);
  out.total = sub(out.intra, scale(out.inter, variant.lambda));
  if (variant.kind == LossKind::center_penalty) {
    out.center = l_center(real, fake, variant.mu_data, variant.mu_g);
    out.total = add(out.total, scale(*out.center, variant.beta));
  }
  return out;
}

Var loss_generator(Var real, Var fake, const PairScheme& scheme) { return l_inter(real, fake, scheme); }

GanLoss loss_gan_baseline(Var logit_real, Var logit_fake) {
  for (Var v : {logit_real, logit_fake}) {
    const auto& s = v.shape();
    if (s.size() != 2 || s[1] != 1) throw ShapeError("loss_gan_baseline: logits must be [m, 1], got " + shape_string(s));
    if (!v.value().all_finite()) throw NonFiniteError("loss_gan_baseline: non-finite logits");
  }
  // -log sigma(x) = softplus(-x), -log(1 - sigma(x)) = softplus(x)
  Var real_term = mean(softplus(scale(logit_real, -1.0)));
  Var fake_term = mean(softplus(logit_fake));
  return {add(real_term, fake_term), mean(softplus(scale(logit_fake, -1.0)))};
}

}  // namespace mlgan
