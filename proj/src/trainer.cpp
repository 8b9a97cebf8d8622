#include "mlgan/trainer.hpp"

#include <cmath>
#include <string>

#include "mlgan/errors.hpp"

namespace mlgan {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), purpose};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

Rng training_stream(std::uint64_t seed) {
  return Rng{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x7EA1u};
}

std::vector<Tensor> collect(const GradientMap& grads, const std::vector<Var>& vars) {
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (Var v : vars) out.push_back(grads[v]);
  return out;
}

void require_finite_params(const Mlp& net, const char* which) {
  for (const Tensor* p : net.parameters())
    if (!p->all_finite()) throw NonFiniteError(std::string(which) + " parameters became non-finite");
}

}  // namespace

void TrainConfig::validate() const {
  if (m < 2) throw ConfigError("m must be at least 2");
  if (n_critic < 1) throw ConfigError("n_critic must be at least 1");
  if (data_dim == 0 || z_dim == 0 || d_dim == 0 || hidden_width == 0)
    throw ConfigError("dimensions must be positive");
  if (total_gen_iters == 0) throw ConfigError("total_gen_iters must be positive");
  try {
    adam.validate();
    if (model == Model::mlgan) variant.validate(d_dim);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (model == Model::mlgan && variant.kind == LossKind::clipping && !(clip_c > 0.0))
    throw ConfigError("clip_c must be positive for the clipping variant");
}

std::vector<std::size_t> TrainConfig::generator_dims() const {
  std::vector<std::size_t> dims{z_dim};
  dims.insert(dims.end(), hidden_layers, hidden_width);
  dims.push_back(data_dim);
  return dims;
}

std::vector<std::size_t> TrainConfig::discriminator_dims() const {
  std::vector<std::size_t> dims{data_dim};
  dims.insert(dims.end(), hidden_layers, hidden_width);
  dims.push_back(model == Model::gan_baseline ? 1 : d_dim);
  return dims;
}

Trainer::Trainer(TrainConfig config, RealSampler sampler)
    : config_(std::move(config)), sampler_(std::move(sampler)), rng_(training_stream(config_.seed)) {
  config_.validate();
  generator_ = Mlp::create(config_.generator_dims(), Activation::leaky_relu, config_.generator_output,
                           derive_seed(config_.seed, 1));
  // The embedding network has no squashing output layer.
  discriminator_ =
      Mlp::create(config_.discriminator_dims(), Activation::leaky_relu, Activation::linear, derive_seed(config_.seed, 2));
  if (config_.model == Model::mlgan && config_.variant.kind == LossKind::clipping)
    clip_weights(discriminator_.parameters(), config_.clip_c);
  adam_g_ = AdamState::zeros_like(std::as_const(generator_).parameters());
  adam_d_ = AdamState::zeros_like(std::as_const(discriminator_).parameters());
}

Trainer::Trainer(TrainConfig config, RealSampler sampler, const TrainerState& resume_from)
    : Trainer(std::move(config), std::move(sampler)) {
  if (resume_from.generator.dims() != generator_.dims())
    throw CheckpointError("checkpoint generator dims do not match the configuration");
  if (resume_from.discriminator.dims() != discriminator_.dims())
    throw CheckpointError("checkpoint discriminator dims do not match the configuration (d_dim " +
                          std::to_string(resume_from.discriminator.output_dim()) + " vs " +
                          std::to_string(discriminator_.output_dim()) + ")");
  generator_ = resume_from.generator;
  discriminator_ = resume_from.discriminator;
  adam_g_ = resume_from.adam_generator;
  adam_d_ = resume_from.adam_discriminator;
  if (adam_g_.first_moment.size() != generator_.parameters().size() ||
      adam_d_.first_moment.size() != discriminator_.parameters().size())
    throw CheckpointError("checkpoint optimizer state does not match the networks");
  rng_.restore(resume_from.rng_state);
  gen_step_ = resume_from.gen_step;
  critic_updates_ = resume_from.critic_updates;
}

TrainerState Trainer::state() const {
  return {generator_, discriminator_, adam_g_, adam_d_, rng_.state(), gen_step_, critic_updates_};
}

void Trainer::critic_update() {
  const Tensor real = sampler_(rng_, config_.m);
  const Tensor noise = rng_.normal_matrix(config_.m, config_.z_dim);
  const Tensor fake = generator_.forward(noise);

  Tape tape;
  const auto params = discriminator_.bind(tape, true);
  const Var out_real = discriminator_.forward(tape, params, tape.constant(real));
  const Var out_fake = discriminator_.forward(tape, params, tape.constant(fake));

  Var loss;
  if (config_.model == Model::gan_baseline) {
    loss = loss_gan_baseline(out_real, out_fake).d_loss;
  } else {
    const auto parts = loss_discriminator(config_.variant, out_real, out_fake, config_.pairs);
    loss = parts.total;
    last_intra_ = parts.intra.value().item();
    last_inter_ = parts.inter.value().item();
    if (parts.center) last_center_ = parts.center->value().item();
  }
  last_d_loss_ = loss.value().item();

  const auto grads = collect(tape.backward(loss), params);
  adam_step(discriminator_.parameters(), grads, adam_d_, config_.adam);
  if (config_.model == Model::mlgan && config_.variant.kind == LossKind::clipping)
    clip_weights(discriminator_.parameters(), config_.clip_c);
  require_finite_params(discriminator_, "discriminator");
  ++critic_updates_;
}

void Trainer::generator_update() {
  const Tensor real = sampler_(rng_, config_.m);
  const Tensor noise = rng_.normal_matrix(config_.m, config_.z_dim);

  Tape tape;
  const auto gparams = generator_.bind(tape, true);
  const auto dparams = discriminator_.bind(tape, false);
  const Var fake = generator_.forward(tape, gparams, tape.constant(noise));
  const Var out_fake = discriminator_.forward(tape, dparams, fake);

  Var loss;
  if (config_.model == Model::gan_baseline) {
    const Var out_real = discriminator_.forward(tape, dparams, tape.constant(real));
    loss = loss_gan_baseline(out_real, out_fake).g_loss;
  } else {
    const Var out_real = discriminator_.forward(tape, dparams, tape.constant(real));
    loss = loss_generator(out_real, out_fake, config_.pairs);
  }
  last_g_loss_ = loss.value().item();

  const auto grads = collect(tape.backward(loss), gparams);
  adam_step(generator_.parameters(), grads, adam_g_, config_.adam);
  require_finite_params(generator_, "generator");
}

MetricRecord Trainer::make_record(const TrainHooks& hooks) const {
  MetricRecord r;
  r.step = gen_step_;
  r.d_loss = last_d_loss_;
  r.g_loss = last_g_loss_;
  r.l_intra = last_intra_;
  r.l_inter = last_inter_;
  r.l_center = last_center_;
  r.max_abs_dparam = discriminator_.max_abs_parameter();
  if (hooks.evaluate) {
    const EvalMetrics e = hooks.evaluate(generator_, gen_step_);
    r.modes_covered = e.modes_covered;
    r.high_quality_fraction = e.high_quality_fraction;
    r.classifier_score = e.classifier_score;
    r.mmd = e.mmd;
  }
  return r;
}

RunLog Trainer::run(const TrainHooks& hooks, std::optional<std::uint64_t> until) {
  const std::uint64_t stop = until.value_or(config_.total_gen_iters);
  RunLog log;
  if (diverged_) {
    log.status = RunStatus::diverged;
    return log;
  }
  auto emit = [&] {
    log.records.push_back(make_record(hooks));
    if (hooks.on_record) hooks.on_record(log.records.back(), *this);
  };

  while (gen_step_ < stop) {
    try {
      for (std::size_t t = 0; t < config_.n_critic; ++t) {
        critic_update();
        if (hooks.on_update) hooks.on_update(UpdateKind::critic, *this);
      }
      generator_update();
      ++gen_step_;
      if (hooks.on_update) hooks.on_update(UpdateKind::generator, *this);
    } catch (const NonFiniteError& e) {
      diverged_ = true;
      log.status = RunStatus::diverged;
      log.diverged_at = gen_step_ + 1;
      log.divergence_reason = e.what();
      return log;
    }
    if (config_.eval_every > 0 && (gen_step_ % config_.eval_every == 0 || gen_step_ == config_.total_gen_iters)) {
      try {
        emit();
      } catch (const NonFiniteError& e) {
        diverged_ = true;
        log.status = RunStatus::diverged;
        log.diverged_at = gen_step_;
        log.divergence_reason = e.what();
        return log;
      }
    }
  }
  return log;
}

RunLog train(const TrainConfig& config, RealSampler sampler, const TrainHooks& hooks) {
  Trainer trainer(config, std::move(sampler));
  return trainer.run(hooks);
}

}  // namespace mlgan
