// mlgan: run experiments, summarize them, check gradients, demo the metric solver.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlgan/config.hpp"
#include "mlgan/errors.hpp"
#include "mlgan/experiment.hpp"
#include "mlgan/gradient_suite.hpp"
#include "mlgan/mmc.hpp"

namespace {

int cmd_grad_check(std::size_t instances, std::uint64_t seed) {
  const auto results = mlgan::run_gradient_suite(instances, seed);
  bool ok = true;
  for (const auto& r : results) {
    const bool pass = r.max_relative_error < 1e-4;
    ok = ok && pass;
    std::printf("%-28s max rel err %.3e over %zu instances  %s\n", r.name.c_str(), r.max_relative_error,
                r.instances, pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

int cmd_mmc_demo() {
  using namespace mlgan::mmc;
  // Two features: the first separates the classes, the second is noise.
  PairConstraints c;
  c.similar = {{{0.0, 0.0}, {0.1, 1.0}}, {{1.0, 0.5}, {1.1, -0.5}}, {{2.0, 1.0}, {1.9, 0.0}}};
  c.dissimilar = {{{0.0, 0.0}, {1.0, 0.1}}, {{1.0, 0.5}, {2.0, 0.4}}, {{0.1, 1.0}, {2.0, 1.1}}};
  const FitResult r = fit_diagonal(c);
  std::printf("iterations %zu, converged %s\n", r.iterations, r.converged ? "yes" : "no");
  for (std::size_t i = 0; i < r.history.size(); ++i) std::printf("  g[%zu] = %.10f\n", i, r.history[i]);
  std::printf("diag(A) =");
  for (double a : r.metric.diag) std::printf(" %.6f", a);
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric-learning GAN experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Train every seed of an experiment config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--set", overrides, "Override a config key (key=value)");

  std::string run_dir;
  auto* summarize = app.add_subcommand("summarize", "Aggregate run summaries into a table");
  summarize->add_option("run_dir", run_dir, "Directory holding run outputs")->required();

  std::size_t instances = 20;
  std::uint64_t grad_seed = 0;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of every loss gradient");
  grad->add_option("--instances", instances, "Random instances per loss")->check(CLI::PositiveNumber);
  grad->add_option("--seed", grad_seed, "Seed for the random instances");

  app.add_subcommand("mmc-demo", "Fit a diagonal metric on a built-in instance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return mlgan::run_experiment(mlgan::load_config(config_path, overrides));
    if (summarize->parsed()) {
      std::cout << mlgan::format_table(mlgan::summarize(run_dir));
      return 0;
    }
    if (grad->parsed()) return cmd_grad_check(instances, grad_seed);
    return cmd_mmc_demo();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
