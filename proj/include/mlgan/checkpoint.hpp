#pragma once

// Checkpoint files are JSON documents:
//
//   {
//     "format": "mlgan-checkpoint", "version": 1,
//     "gen_step": <int>, "critic_updates": <int>, "rng": "<engine state>",
//     "generator":     <network>,
//     "discriminator": <network>,
//     "adam_generator":     {"t": <int>, "first_moment": <params>, "second_moment": <params>},
//     "adam_discriminator": {...}
//   }
//
// where <network> is
//   {"dims": [...], "hidden_activation": "leaky_relu", "output_activation": "linear",
//    "params": <params>}
// and <params> maps "layer<i>.weight" / "layer<i>.bias" to {"shape": [...], "data": [...]}.
// Doubles are written with 17 significant digits, so loading is exact.

#include <filesystem>

#include "json.hpp"

#include "mlgan/nn.hpp"
#include "mlgan/trainer.hpp"

namespace mlgan {

nlohmann::json network_to_json(const Mlp& net);
Mlp network_from_json(const nlohmann::json& j);

void save_network(const Mlp& net, const std::filesystem::path& path);
Mlp load_network(const std::filesystem::path& path);

void checkpoint_save(const TrainerState& state, const std::filesystem::path& path);
/// Throws CheckpointError on a missing, unreadable or malformed file.
TrainerState checkpoint_load(const std::filesystem::path& path);

}  // namespace mlgan
