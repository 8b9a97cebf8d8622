#pragma once

// Experiment configuration files are flat `key = value` lines; `#` starts a
// comment. Unknown and repeated keys are rejected. Command-line overrides
// (`key=value`) are applied after the file. See README.md for the key list.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "mlgan/trainer.hpp"

namespace mlgan {

enum class Objective { mlgan_vanilla, mlgan_clipping, mlgan_center, gan_baseline };

std::string objective_name(Objective o);

enum class DatasetKind { ring, image_grid };

struct ExperimentConfig {
  Objective objective = Objective::mlgan_clipping;
  TrainConfig train;  ///< train.seed is replaced per run by each entry of `seeds`
  std::vector<std::uint64_t> seeds{0};

  DatasetKind dataset = DatasetKind::ring;
  std::size_t ring_modes = 8;
  double ring_radius = 2.0;
  double ring_sigma = 0.05;
  std::filesystem::path image_grid_path;

  std::filesystem::path output_dir = "runs";
  std::uint64_t checkpoint_every = 0;  ///< 0: at every evaluation
  std::size_t eval_samples = 2000;
  std::size_t mmd_samples = 500;
  double mmd_bandwidth = 0.5;
  double coverage_radius = 3.0;  ///< in mixture sigmas
  std::size_t classifier_train = 4000;
  std::uint64_t classifier_seed = 12345;
  int threads = 0;  ///< 0: OpenMP default

  /// Resolved key/value view, written next to every run for reproducibility.
  std::map<std::string, std::string> to_map() const;
};

/// Splits `key=value`; throws ConfigError when malformed.
std::pair<std::string, std::string> split_assignment(const std::string& text);

ExperimentConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace mlgan
