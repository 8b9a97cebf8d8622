#pragma once

// Experiment runner: seeded training runs with streamed metrics, checkpoints
// and per-run summaries, plus aggregation across runs.
//
// Layout of one run:  <output_dir>/<variant>/seed_<s>/
//   config.txt      resolved configuration
//   metrics.jsonl   one JSON object per metric record
//   checkpoint.json latest checkpoint
//   best.json       checkpoint at the best evaluation (highest classifier score)
//   summary.json    final and best metrics, divergence flag

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlgan/config.hpp"
#include "mlgan/metrics.hpp"
#include "mlgan/trainer.hpp"

namespace mlgan {

struct RunSummary {
  std::string variant;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::optional<std::uint64_t> diverged_at;
  std::uint64_t steps = 0;
  std::optional<MetricRecord> final_record;
  std::optional<MetricRecord> best_record;
};

nlohmann::json record_to_json(const MetricRecord& r);
MetricRecord record_from_json(const nlohmann::json& j);
nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

/// The record with the highest classifier score; earliest wins ties.
std::optional<MetricRecord> best_record(const std::vector<MetricRecord>& records);

/// Shared evaluation context for ring-mixture runs (the classifier is trained once).
struct RingEvaluator {
  MixtureSpec spec;
  ModeClassifier classifier;
  std::size_t z_dim = 2;
  std::size_t eval_samples = 2000;
  std::size_t mmd_samples = 500;
  double mmd_bandwidth = 0.5;
  double coverage_radius = 3.0;
  std::uint64_t seed = 0;

  EvalMetrics operator()(const Mlp& generator, std::uint64_t step) const;
};

RealSampler make_sampler(const ExperimentConfig& cfg);

struct RunResult {
  RunSummary summary;
  RunLog log;
};

/// Executes one seed of an experiment and writes its output directory.
/// `observer` (optional) sees every parameter update.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::function<void(UpdateKind, const Trainer&)>& observer = {});

/// Runs every seed; returns the process exit code (0 when all runs finished,
/// diverged runs included).
int run_experiment(const ExperimentConfig& cfg);

struct VariantStats {
  std::string variant;
  std::size_t runs = 0;
  std::size_t diverged = 0;
  double score_mean = 0.0;
  double score_sd = 0.0;
  double modes_mean = 0.0;
  double modes_sd = 0.0;
  double best_score_mean = 0.0;
  double best_score_sd = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
std::pair<double, double> mean_sd(const std::vector<double>& values);

/// Aggregates every summary.json below run_dir, sorted ascending by mean final
/// classifier score. Writes summary_table.json and summary_table.txt into run_dir.
std::vector<VariantStats> summarize(const std::filesystem::path& run_dir);
std::string format_table(const std::vector<VariantStats>& stats);

}  // namespace mlgan
