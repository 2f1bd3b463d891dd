#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "oim/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale metric-learning lab: prototype-aware normalization and "
               "localization-aware lookup-table training on synthetic long-tailed data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
  };

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "run all finite-difference gradient suites");
  CLI::App* toy2d = app.add_subcommand("toy2d", "long-tailed 2D experiment across norm variants");
  CLI::App* separability = app.add_subcommand(
      "separability", "per-epoch pairwise cosine similarity of the memory banks");
  CLI::App* ablation =
      app.add_subcommand("ablation", "norm x loss retrieval grid with IoU-corrupted proposals");
  for (CLI::App* sub : {gradcheck, toy2d, separability, ablation}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  oim::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? oim::default_config() : oim::load_config(config_path);
    if (seed_override >= 0) {
      cfg.seed = static_cast<uint64_t>(seed_override);
      cfg.seeds = {cfg.seed, cfg.seed + 1, cfg.seed + 2, cfg.seed + 3};
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  }

  try {
    if (gradcheck->parsed()) return oim::cmd_gradcheck(cfg);
    if (toy2d->parsed()) return oim::cmd_toy2d(cfg);
    if (separability->parsed()) return oim::cmd_separability(cfg);
    if (ablation->parsed()) return oim::cmd_ablation(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
