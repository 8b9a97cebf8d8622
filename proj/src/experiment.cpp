#include "mlgan/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "mlgan/checkpoint.hpp"
#include "mlgan/errors.hpp"
#include "mlgan/image_grid.hpp"
#include "mlgan/kernels.hpp"

namespace mlgan {

using nlohmann::json;

namespace {

Rng eval_stream(std::uint64_t seed, std::uint64_t step) {
  return Rng{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(step),
             static_cast<std::uint32_t>(step >> 32), 0xE7A1u};
}

std::filesystem::path run_directory(const ExperimentConfig& cfg, std::uint64_t seed) {
  return cfg.output_dir / objective_name(cfg.objective) / ("seed_" + std::to_string(seed));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

// Image-grid runs report only MMD against fresh data.
struct ImageEvaluator {
  std::shared_ptr<const ImageGrid> grid;
  std::size_t z_dim = 2;
  std::size_t samples = 500;
  double bandwidth = 0.5;
  std::uint64_t seed = 0;

  EvalMetrics operator()(const Mlp& generator, std::uint64_t step) const {
    Rng rng = eval_stream(seed, step);
    const Tensor fake = generator.forward(rng.normal_matrix(samples, z_dim));
    const Tensor real = sample_images(*grid, samples, rng);
    EvalMetrics m;
    m.mmd = mmd_rbf(fake, real, bandwidth);
    return m;
  }
};

}  // namespace

json record_to_json(const MetricRecord& r) {
  json j = {{"step", r.step},
            {"d_loss", r.d_loss},
            {"g_loss", r.g_loss},
            {"modes_covered", r.modes_covered},
            {"high_quality_fraction", r.high_quality_fraction},
            {"classifier_score", r.classifier_score},
            {"mmd", r.mmd},
            {"max_abs_dparam", r.max_abs_dparam}};
  if (r.l_intra) j["l_intra"] = *r.l_intra;
  if (r.l_inter) j["l_inter"] = *r.l_inter;
  if (r.l_center) j["l_center"] = *r.l_center;
  return j;
}

MetricRecord record_from_json(const json& j) {
  MetricRecord r;
  r.step = j.at("step").get<std::uint64_t>();
  r.d_loss = j.at("d_loss").get<double>();
  r.g_loss = j.at("g_loss").get<double>();
  r.modes_covered = j.at("modes_covered").get<std::size_t>();
  r.high_quality_fraction = j.at("high_quality_fraction").get<double>();
  r.classifier_score = j.at("classifier_score").get<double>();
  r.mmd = j.at("mmd").get<double>();
  r.max_abs_dparam = j.at("max_abs_dparam").get<double>();
  if (j.contains("l_intra")) r.l_intra = j["l_intra"].get<double>();
  if (j.contains("l_inter")) r.l_inter = j["l_inter"].get<double>();
  if (j.contains("l_center")) r.l_center = j["l_center"].get<double>();
  return r;
}

json summary_to_json(const RunSummary& s) {
  json j = {{"variant", s.variant}, {"seed", s.seed}, {"diverged", s.diverged}, {"steps", s.steps}};
  j["diverged_at"] = s.diverged_at ? json(*s.diverged_at) : json(nullptr);
  j["final"] = s.final_record ? record_to_json(*s.final_record) : json(nullptr);
  j["best"] = s.best_record ? record_to_json(*s.best_record) : json(nullptr);
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.variant = j.at("variant").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.diverged = j.at("diverged").get<bool>();
  s.steps = j.at("steps").get<std::uint64_t>();
  if (!j.at("diverged_at").is_null()) s.diverged_at = j["diverged_at"].get<std::uint64_t>();
  if (!j.at("final").is_null()) s.final_record = record_from_json(j["final"]);
  if (!j.at("best").is_null()) s.best_record = record_from_json(j["best"]);
  return s;
}

std::optional<MetricRecord> best_record(const std::vector<MetricRecord>& records) {
  std::optional<MetricRecord> best;
  for (const auto& r : records)
    if (!best || r.classifier_score > best->classifier_score) best = r;
  return best;
}

EvalMetrics RingEvaluator::operator()(const Mlp& generator, std::uint64_t step) const {
  Rng rng = eval_stream(seed, step);
  const Tensor fake = generator.forward(rng.normal_matrix(eval_samples, z_dim));
  EvalMetrics m;
  const ModeCoverage cov = mode_coverage(fake, spec, coverage_radius);
  m.modes_covered = cov.modes_covered;
  m.high_quality_fraction = cov.high_quality_fraction;
  m.classifier_score = classifier_score(classifier.predict_proba(fake));
  const std::size_t k = std::min(mmd_samples, eval_samples);
  std::vector<double> head(fake.data().begin(), fake.data().begin() + static_cast<std::ptrdiff_t>(k * 2));
  const Tensor real = sample_mixture(spec, k, rng);
  m.mmd = mmd_rbf(Tensor({k, 2}, std::move(head)), real, mmd_bandwidth);
  return m;
}

RealSampler make_sampler(const ExperimentConfig& cfg) {
  if (cfg.dataset == DatasetKind::ring) {
    const MixtureSpec spec = MixtureSpec::ring(cfg.ring_modes, cfg.ring_radius, cfg.ring_sigma);
    return [spec](Rng& rng, std::size_t n) { return sample_mixture(spec, n, rng); };
  }
  auto grid = std::make_shared<const ImageGrid>(read_image_grid(cfg.image_grid_path));
  return [grid](Rng& rng, std::size_t n) { return sample_images(*grid, n, rng); };
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::function<void(UpdateKind, const Trainer&)>& observer) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainHooks hooks;
  hooks.on_update = observer;

  if (cfg.dataset == DatasetKind::ring) {
    RingEvaluator ev;
    ev.spec = MixtureSpec::ring(cfg.ring_modes, cfg.ring_radius, cfg.ring_sigma);
    ev.classifier = fit_mode_classifier(ev.spec, cfg.classifier_train, cfg.classifier_seed);
    ev.z_dim = tc.z_dim;
    ev.eval_samples = cfg.eval_samples;
    ev.mmd_samples = cfg.mmd_samples;
    ev.mmd_bandwidth = cfg.mmd_bandwidth;
    ev.coverage_radius = cfg.coverage_radius;
    ev.seed = seed;
    hooks.evaluate = ev;
  } else {
    auto grid = std::make_shared<const ImageGrid>(read_image_grid(cfg.image_grid_path));
    tc.data_dim = grid->image_size();
    tc.generator_output = Activation::tanh;
    hooks.evaluate = ImageEvaluator{grid, tc.z_dim, cfg.mmd_samples, cfg.mmd_bandwidth, seed};
  }

  const auto dir = run_directory(cfg, seed);
  std::filesystem::create_directories(dir);
  {
    ExperimentConfig resolved = cfg;
    resolved.seeds = {seed};
    std::ostringstream os;
    for (const auto& [k, v] : resolved.to_map()) os << k << " = " << v << "\n";
    write_text(dir / "config.txt", os.str());
  }

  std::ofstream metrics(dir / "metrics.jsonl");
  if (!metrics) throw std::runtime_error("cannot write metrics in '" + dir.string() + "'");
  const std::uint64_t ckpt_every = cfg.checkpoint_every ? cfg.checkpoint_every : tc.eval_every;
  std::optional<double> best_score;
  hooks.on_record = [&](const MetricRecord& r, const Trainer& trainer) {
    metrics << record_to_json(r).dump() << "\n";
    metrics.flush();
    if (ckpt_every && r.step % ckpt_every == 0) checkpoint_save(trainer.state(), dir / "checkpoint.json");
    if (!best_score || r.classifier_score > *best_score) {
      best_score = r.classifier_score;
      checkpoint_save(trainer.state(), dir / "best.json");
    }
  };

  Trainer trainer(tc, make_sampler(cfg));
  RunResult result;
  result.log = trainer.run(hooks);
  checkpoint_save(trainer.state(), dir / "checkpoint.json");

  RunSummary& s = result.summary;
  s.variant = objective_name(cfg.objective);
  s.seed = seed;
  s.diverged = result.log.status == RunStatus::diverged;
  s.diverged_at = result.log.diverged_at;
  s.steps = trainer.gen_step();
  if (!result.log.records.empty()) s.final_record = result.log.records.back();
  s.best_record = best_record(result.log.records);
  write_text(dir / "summary.json", summary_to_json(s).dump(2) + "\n");
  return result;
}

int run_experiment(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) kernels::set_max_threads(cfg.threads);
  const auto n = static_cast<std::ptrdiff_t>(cfg.seeds.size());
  std::vector<std::string> errors(cfg.seeds.size());
  std::vector<std::optional<RunSummary>> done(cfg.seeds.size());

  // Seeds are independent; nested kernel regions run serially inside each.
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      done[i] = run_single(cfg, cfg.seeds[i]).summary;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }

  int code = 0;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "seed " << cfg.seeds[i] << ": " << errors[i] << "\n";
      code = 1;
      continue;
    }
    const RunSummary& s = *done[i];
    std::cout << s.variant << " seed " << s.seed << ": " << (s.diverged ? "diverged" : "completed") << " after "
              << s.steps << " generator iterations";
    if (s.best_record)
      std::cout << ", best classifier score " << s.best_record->classifier_score << " (modes "
                << s.best_record->modes_covered << ", high quality " << s.best_record->high_quality_fraction << ")";
    std::cout << "\n";
  }
  return code;
}

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<VariantStats> summarize(const std::filesystem::path& run_dir) {
  if (!std::filesystem::is_directory(run_dir)) throw std::runtime_error("'" + run_dir.string() + "' is not a directory");
  std::map<std::string, std::vector<RunSummary>> by_variant;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(run_dir))
    if (entry.is_regular_file() && entry.path().filename() == "summary.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    try {
      RunSummary s = summary_from_json(json::parse(in));
      by_variant[s.variant].push_back(std::move(s));
    } catch (const json::exception& e) {
      throw std::runtime_error("malformed summary '" + f.string() + "': " + e.what());
    }
  }
  if (by_variant.empty()) throw std::runtime_error("no run summaries found under '" + run_dir.string() + "'");

  std::vector<VariantStats> table;
  for (const auto& [variant, runs] : by_variant) {
    VariantStats st;
    st.variant = variant;
    std::vector<double> scores, modes, best;
    for (const auto& r : runs) {
      ++st.runs;
      st.diverged += r.diverged;
      if (r.final_record) {
        scores.push_back(r.final_record->classifier_score);
        modes.push_back(static_cast<double>(r.final_record->modes_covered));
      }
      if (r.best_record) best.push_back(r.best_record->classifier_score);
    }
    std::tie(st.score_mean, st.score_sd) = mean_sd(scores);
    std::tie(st.modes_mean, st.modes_sd) = mean_sd(modes);
    std::tie(st.best_score_mean, st.best_score_sd) = mean_sd(best);
    table.push_back(st);
  }
  std::stable_sort(table.begin(), table.end(),
                   [](const VariantStats& a, const VariantStats& b) { return a.score_mean < b.score_mean; });

  json out = json::array();
  for (const auto& st : table)
    out.push_back({{"variant", st.variant},
                   {"runs", st.runs},
                   {"diverged", st.diverged},
                   {"classifier_score_mean", st.score_mean},
                   {"classifier_score_sd", st.score_sd},
                   {"modes_covered_mean", st.modes_mean},
                   {"modes_covered_sd", st.modes_sd},
                   {"best_classifier_score_mean", st.best_score_mean},
                   {"best_classifier_score_sd", st.best_score_sd}});
  write_text(run_dir / "summary_table.json", out.dump(2) + "\n");
  write_text(run_dir / "summary_table.txt", format_table(table));
  return table;
}

std::string format_table(const std::vector<VariantStats>& stats) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %5s %9s %20s %16s %20s\n", "variant", "runs", "diverged", "classifier score",
                "modes covered", "best score");
  os << line;
  for (const auto& s : stats) {
    std::snprintf(line, sizeof line, "%-16s %5zu %9zu %11.3f +- %5.3f %8.2f +- %4.2f %11.3f +- %5.3f\n",
                  s.variant.c_str(), s.runs, s.diverged, s.score_mean, s.score_sd, s.modes_mean, s.modes_sd,
                  s.best_score_mean, s.best_score_sd);
    os << line;
  }
  return os.str();
}

}  // namespace mlgan
