#pragma once

// Alternating critic / generator training loop with Adam updates.
//
// One generator iteration performs n_critic discriminator updates, each on a
// freshly sampled real batch and noise batch, followed by one generator update
// on another fresh pair of batches. The clipping variant clamps every
// discriminator parameter into [-clip_c, clip_c] after each discriminator step.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlgan/adam.hpp"
#include "mlgan/losses.hpp"
#include "mlgan/nn.hpp"
#include "mlgan/random.hpp"

namespace mlgan {

enum class Model { mlgan, gan_baseline };

struct TrainConfig {
  Model model = Model::mlgan;
  LossVariant variant = LossVariant::defaults(LossKind::vanilla, 64);
  PairScheme pairs;
  std::size_t m = 64;
  std::size_t n_critic = 5;
  AdamConfig adam;
  double clip_c = 0.01;
  std::size_t data_dim = 2;
  std::size_t z_dim = 2;
  std::size_t d_dim = 64;
  std::size_t hidden_width = 128;
  std::size_t hidden_layers = 2;
  Activation generator_output = Activation::linear;
  std::uint64_t total_gen_iters = 1000;
  std::uint64_t eval_every = 500;
  std::uint64_t seed = 0;

  /// Throws ConfigError on a malformed configuration.
  void validate() const;
  std::vector<std::size_t> generator_dims() const;
  /// Embedding discriminator, or width-1 logit network for the baseline.
  std::vector<std::size_t> discriminator_dims() const;
};

struct MetricRecord {
  std::uint64_t step = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  std::optional<double> l_intra;
  std::optional<double> l_inter;
  std::optional<double> l_center;
  std::size_t modes_covered = 0;
  double high_quality_fraction = 0.0;
  double classifier_score = 1.0;
  double mmd = 0.0;
  double max_abs_dparam = 0.0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

enum class RunStatus { completed, diverged };

struct RunLog {
  std::vector<MetricRecord> records;
  RunStatus status = RunStatus::completed;
  std::optional<std::uint64_t> diverged_at;
  std::string divergence_reason;

  friend bool operator==(const RunLog&, const RunLog&) = default;
};

/// Draws n real samples [n, data_dim] from the data stream.
using RealSampler = std::function<Tensor(Rng& rng, std::size_t n)>;

/// Fields filled in by an evaluation hook; losses and parameter norms come from the trainer.
struct EvalMetrics {
  std::size_t modes_covered = 0;
  double high_quality_fraction = 0.0;
  double classifier_score = 1.0;
  double mmd = 0.0;
};

enum class UpdateKind { critic, generator };

class Trainer;

struct TrainHooks {
  std::function<EvalMetrics(const Mlp& generator, std::uint64_t step)> evaluate;
  /// Called after every parameter update (after clipping, for critic updates).
  std::function<void(UpdateKind, const Trainer&)> on_update;
  /// Called with every record as soon as it is produced.
  std::function<void(const MetricRecord&, const Trainer&)> on_record;
};

/// Everything needed to continue a run bit-for-bit.
struct TrainerState {
  Mlp generator;
  Mlp discriminator;
  AdamState adam_generator;
  AdamState adam_discriminator;
  std::string rng_state;
  std::uint64_t gen_step = 0;
  std::uint64_t critic_updates = 0;
};

class Trainer {
 public:
  Trainer(TrainConfig config, RealSampler sampler);
  Trainer(TrainConfig config, RealSampler sampler, const TrainerState& resume_from);

  /// Runs generator iterations until `until` (default: total_gen_iters) or divergence.
  RunLog run(const TrainHooks& hooks = {}, std::optional<std::uint64_t> until = std::nullopt);

  const TrainConfig& config() const { return config_; }
  const Mlp& generator() const { return generator_; }
  const Mlp& discriminator() const { return discriminator_; }
  std::uint64_t gen_step() const { return gen_step_; }
  std::uint64_t critic_updates() const { return critic_updates_; }
  std::uint64_t generator_updates() const { return gen_step_; }
  bool diverged() const { return diverged_; }

  TrainerState state() const;

 private:
  void critic_update();
  void generator_update();
  MetricRecord make_record(const TrainHooks& hooks) const;

  TrainConfig config_;
  RealSampler sampler_;
  Mlp generator_;
  Mlp discriminator_;
  AdamState adam_g_;
  AdamState adam_d_;
  Rng rng_;
  std::uint64_t gen_step_ = 0;
  std::uint64_t critic_updates_ = 0;
  bool diverged_ = false;

  // Most recent loss values, reported in metric records.
  double last_d_loss_ = 0.0;
  double last_g_loss_ = 0.0;
  std::optional<double> last_intra_;
  std::optional<double> last_inter_;
  std::optional<double> last_center_;
};

RunLog train(const TrainConfig& config, RealSampler sampler, const TrainHooks& hooks = {});

}  // namespace mlgan
