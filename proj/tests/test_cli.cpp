#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mlgan/config.hpp"
#include "mlgan/errors.hpp"
#include "mlgan/experiment.hpp"

using namespace mlgan;

namespace {

ExperimentConfig parse(const std::string& text, const std::vector<std::string>& overrides = {}) {
  std::istringstream in(text);
  return parse_config(in, overrides);
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mlgan_cli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_summary(const std::filesystem::path& dir, const std::string& variant, std::uint64_t seed, double score,
                   std::size_t modes) {
  RunSummary s;
  s.variant = variant;
  s.seed = seed;
  s.steps = 10;
  MetricRecord r;
  r.step = 10;
  r.classifier_score = score;
  r.modes_covered = modes;
  s.final_record = r;
  s.best_record = r;
  const auto d = dir / variant / ("seed_" + std::to_string(seed));
  std::filesystem::create_directories(d);
  std::ofstream(d / "summary.json") << summary_to_json(s).dump(2);
}

}  // namespace

TEST(Config, DefaultsPerVariant) {
  auto clip = parse("variant = clipping\n");
  EXPECT_EQ(clip.objective, Objective::mlgan_clipping);
  EXPECT_DOUBLE_EQ(clip.train.variant.lambda, 0.5);
  EXPECT_EQ(clip.train.d_dim, 64u);
  EXPECT_DOUBLE_EQ(clip.train.clip_c, 0.01);

  auto center = parse("variant = center\n");
  EXPECT_DOUBLE_EQ(center.train.variant.lambda, 1.0);
  EXPECT_EQ(center.train.d_dim, 5u);
  EXPECT_EQ(center.train.variant.mu_data, std::vector<double>(5, 0.2));
  EXPECT_DOUBLE_EQ(center.train.variant.beta, 10.0);

  auto vanilla = parse("variant = vanilla\n");
  EXPECT_DOUBLE_EQ(vanilla.train.variant.lambda, 0.5);
}

TEST(Config, CommentsAndExplicitValues) {
  auto c = parse("# experiment\nvariant = center   # trailing\nbeta = 20\nd_dim = 4\nseeds = 3, 1, 2\n\n");
  EXPECT_DOUBLE_EQ(c.train.variant.beta, 20.0);
  EXPECT_EQ(c.train.variant.mu_data, std::vector<double>(4, 0.25));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 1, 2}));
}

TEST(Config, OverridesWin) {
  auto c = parse("variant = vanilla\nseeds = 1,2\nm = 32\n", {"variant=clipping", "seed=1", "m=8"});
  EXPECT_EQ(c.objective, Objective::mlgan_clipping);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(c.train.m, 8u);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse("variant = vanila\n"), std::invalid_argument);
  EXPECT_THROW(parse("lamda = 0.5\n"), ConfigError);
  EXPECT_THROW(parse("m = 4\nm = 5\n"), ConfigError);
  EXPECT_THROW(parse("seeds = 1, 2, 1\n"), ConfigError);
  EXPECT_THROW(parse("m = four\n"), ConfigError);
  EXPECT_THROW(parse("just words\n"), ConfigError);
  EXPECT_THROW(parse("m = 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = 1\nseeds = 2, 3\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/mlgan.cfg"), ConfigError);
}

TEST(Summarize, MeanAndSampleDeviation) {
  const auto dir = fresh_dir("two_runs");
  write_summary(dir, "mlgan_center", 0, 2.0, 6);
  write_summary(dir, "mlgan_center", 1, 4.0, 8);
  const auto table = summarize(dir);
  ASSERT_EQ(table.size(), 1u);
  EXPECT_DOUBLE_EQ(table[0].score_mean, 3.0);
  EXPECT_NEAR(table[0].score_sd, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(table[0].modes_mean, 7.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "summary_table.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "summary_table.txt"));
}

TEST(Summarize, SingleRunHasZeroSpreadAndOrderIsAscending) {
  const auto dir = fresh_dir("ordering");
  write_summary(dir, "mlgan_center", 0, 5.0, 8);
  write_summary(dir, "mlgan_vanilla", 0, 2.5, 3);
  write_summary(dir, "gan_baseline", 0, 3.5, 4);
  const auto table = summarize(dir);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0].variant, "mlgan_vanilla");
  EXPECT_EQ(table[1].variant, "gan_baseline");
  EXPECT_EQ(table[2].variant, "mlgan_center");
  for (const auto& row : table) EXPECT_EQ(row.score_sd, 0.0);
}

TEST(Summarize, EmptyDirectoryIsAnError) {
  EXPECT_THROW(summarize(fresh_dir("empty")), std::runtime_error);
}

TEST(Pipeline, RunIsDeterministicAndStreamsParseableRecords) {
  const auto base = fresh_dir("pipeline");
  const std::string text =
      "variant = center\nm = 16\nhidden_width = 16\ntotal_gen_iters = 20\neval_every = 10\n"
      "eval_samples = 200\nmmd_samples = 100\nclassifier_train = 2000\n";
  auto a = parse(text, {"output_dir=" + (base / "a").string(), "seed=5"});
  auto b = parse(text, {"output_dir=" + (base / "b").string(), "seed=5"});
  const auto ra = run_single(a, 5);
  const auto rb = run_single(b, 5);
  EXPECT_TRUE(ra.log == rb.log);

  const auto run_dir = base / "a" / "mlgan_center" / "seed_5";
  for (const char* f : {"config.txt", "metrics.jsonl", "checkpoint.json", "best.json", "summary.json"})
    EXPECT_TRUE(std::filesystem::exists(run_dir / f)) << f;
  std::ifstream metrics(run_dir / "metrics.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(metrics, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(record_from_json(j) == ra.log.records.at(n));
    ++n;
  }
  EXPECT_EQ(n, 2u);
  EXPECT_EQ(run_experiment(a), 0);
  EXPECT_EQ(summarize(base / "a").front().runs, 1u);
}
