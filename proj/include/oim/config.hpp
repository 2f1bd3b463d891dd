#ifndef OIM_CONFIG_HPP_
#define OIM_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "oim/embedder.hpp"
#include "oim/losses.hpp"
#include "oim/normalization.hpp"
#include "oim/synthdata.hpp"

namespace oim {

// Fully-resolved experiment configuration. Parsed from a JSON file; unknown
// keys are hard errors so typos cannot silently fall back to defaults.
struct ExperimentConfig {
  uint64_t seed = 0;
  std::vector<uint64_t> seeds = {0, 1, 2, 3};  // multi-seed commands
  std::string out_dir = "results";

  NormKind norm_layer = NormKind::ProtoNorm;
  LossConfig loss;          // tau=0.33, eta=0.5, epsilon=0.1
  EmbedderConfig embedder;  // in=2, hidden=16, D=2
  Schedule schedule;        // base_lr=0.003, decay /10 at epoch 16 of 20
  int batch_size = 5;
  int queue_capacity = 8;

  double sigma_floor = 1e-5;
  double track_momentum = 0.1;
  bool norm_affine = false;

  CloudSpec cloud;          // toy2d preset by default
  ProposalSpec proposals;
  double unlabelled_rate = 0.3;  // unlabelled instances per labelled sample
  CloudSpec unlabelled_cloud;     // empty counts = derived from cloud

  int grid_resolution = 64;
  int eval_queries_per_id = 6;
  int eval_gallery_per_id = 5;
};

ExperimentConfig default_config();

// Throws std::runtime_error with a message naming the offending key on any
// parse or validation failure.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& json_text);

// Serialized form that load_config round-trips.
std::string config_to_json(const ExperimentConfig& cfg);

std::string norm_kind_name(NormKind kind);
std::string loss_mode_name(LossMode mode);

}  // namespace oim

#endif  // OIM_CONFIG_HPP_
