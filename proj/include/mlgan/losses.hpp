#pragma once

// Objectives computed on discriminator embeddings.
//
// Embedding batches are matrices [m, d_dim]; row i of the real batch is paired
// with row i of the fake batch for the between-class term.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mlgan/tape.hpp"

namespace mlgan {

enum class LossKind { vanilla, clipping, center_penalty };

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossVariant {
  LossKind kind = LossKind::vanilla;
  double lambda = 0.5;
  double beta = 0.0;
  std::vector<double> mu_data;
  std::vector<double> mu_g;

  /// lambda 0.5 (vanilla, clipping) or 1 (center penalty); beta 10;
  /// mu_data = (1/d, ..., 1/d); mu_g = 0.
  static LossVariant defaults(LossKind kind, std::size_t d_dim);

  /// Throws std::invalid_argument unless lambda > 0, beta >= 0 and, for the
  /// center penalty, both centers have d_dim entries.
  void validate(std::size_t d_dim) const;
};

enum class InterPairing {
  index_matched,  ///< (x_i, G(z_i)) for i = 1..m
  full_cross,     ///< every (x_i, G(z_j)); ablation only
};

struct PairScheme {
  bool normalize = false;  ///< divide each sum by its pair count
  InterPairing inter = InterPairing::index_matched;
};

std::size_t intra_pair_count(std::size_t m);
std::size_t inter_pair_count(std::size_t m, const PairScheme& scheme);

/// Squared Euclidean distance summed over unordered pairs inside each batch.
Var l_intra(Var real, Var fake, const PairScheme& scheme = {});
/// L1 distance summed over real/fake pairs.
Var l_inter(Var real, Var fake, const PairScheme& scheme = {});
/// Squared distance of each real embedding to mu_data plus each fake embedding to mu_g.
Var l_center(Var real, Var fake, std::span<const double> mu_data, std::span<const double> mu_g);

struct DiscriminatorLoss {
  Var total;
  Var intra;
  Var inter;
  std::optional<Var> center;
};

/// intra - lambda * inter, plus beta * center for the center-penalty variant.
DiscriminatorLoss loss_discriminator(const LossVariant& variant, Var real, Var fake, const PairScheme& scheme = {});

/// Between-class distance; the generator minimizes it with the real batch held fixed.
Var loss_generator(Var real, Var fake, const PairScheme& scheme = {});

struct GanLoss {
  Var d_loss;
  Var g_loss;
};

/// Standard GAN with a sigmoid on width-1 logits. The generator term is the
/// non-saturating -mean log sigma(fake).
GanLoss loss_gan_baseline(Var logit_real, Var logit_fake);

}  // namespace mlgan
