#ifndef OIM_EXPERIMENTS_HPP_
#define OIM_EXPERIMENTS_HPP_

#include <string>
#include <vector>

#include "oim/config.hpp"
#include "oim/losses.hpp"
#include "oim/memory_bank.hpp"
#include "oim/metrics.hpp"
#include "oim/normalization.hpp"

namespace oim {

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  bool sep_valid = false;
  SeparabilityReport sep;
};

struct TrainedModel {
  EmbedderConfig embedder_cfg;
  EmbedderParams params;
  NormLayer norm{NormKind::None};
  LookupTable lut{0, 0};
  CircularQueue queue{0, 0};
  std::vector<EpochLog> epochs;
};

// Full pipeline training: synthetic cloud -> (optional proposal corruption)
// -> embedder -> norm layer -> OIM/LOIM step, with SGD momentum and the
// warm-up/decay schedule. Deterministic under (cfg, seed).
TrainedModel train_pipeline(const ExperimentConfig& cfg, uint64_t seed, NormKind norm_kind,
                            LossMode loss_mode, bool corrupt_proposals,
                            bool collect_separability);

// Eval-mode embeddings: embed -> norm (running stats) -> L2 normalize rows.
Matrix embed_eval(TrainedModel& model, const Matrix& inputs);

struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences (h = 1e-5) against every analytic backward:
// BatchNorm, ProtoNorm, L2 normalization, OIM loss, and the composed
// embedder->ProtoNorm->L2->loss pipeline. Threshold 1e-4 relative.
std::vector<GradCheckResult> run_gradcheck(uint64_t seed, int instances_per_suite = 100);

// CLI subcommands. Outputs under cfg.out_dir; exit-code semantics:
// 0 success, 2 check failure (gradcheck only).
int cmd_gradcheck(const ExperimentConfig& cfg);
int cmd_toy2d(const ExperimentConfig& cfg);
int cmd_separability(const ExperimentConfig& cfg);
int cmd_ablation(const ExperimentConfig& cfg);

}  // namespace oim

#endif  // OIM_EXPERIMENTS_HPP_
