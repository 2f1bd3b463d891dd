#include "oim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "oim/io.hpp"

namespace oim {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
  }
}

NormKind parse_norm_kind(const std::string& s) {
  if (s == "none") return NormKind::None;
  if (s == "batchnorm") return NormKind::BatchNorm;
  if (s == "protonorm") return NormKind::ProtoNorm;
  throw std::runtime_error("config: unknown norm_layer '" + s + "'");
}

LossMode parse_loss_mode(const std::string& s) {
  if (s == "oim" || s == "OIM") return LossMode::OIM;
  if (s == "loim" || s == "LOIM") return LossMode::LOIM;
  throw std::runtime_error("config: unknown loss mode '" + s + "'");
}

Nonlinearity parse_activation(const std::string& s) {
  if (s == "leaky_relu") return Nonlinearity::LeakyRelu;
  if (s == "tanh") return Nonlinearity::Tanh;
  if (s == "identity") return Nonlinearity::Identity;
  throw std::runtime_error("config: unknown activation '" + s + "'");
}

std::string activation_name(Nonlinearity f) {
  switch (f) {
    case Nonlinearity::LeakyRelu: return "leaky_relu";
    case Nonlinearity::Tanh: return "tanh";
    case Nonlinearity::Identity: return "identity";
  }
  return "leaky_relu";
}

Vec parse_vec(const json& j) { return j.get<Vec>(); }

Matrix parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("config: " + where + " must be a non-empty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw std::runtime_error("config: ragged rows in " + where);
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

CloudSpec parse_cloud(const json& j, const std::string& where, const CloudSpec& base) {
  check_keys(j, where,
             {"num_ids", "counts", "class_means", "circle_radius", "within_class_std",
              "global_offset", "anisotropy"});
  CloudSpec spec = base;
  if (j.contains("num_ids")) spec.num_ids = j["num_ids"].get<int>();
  if (j.contains("counts")) spec.counts = j["counts"].get<std::vector<int>>();
  if (j.contains("class_means")) spec.class_means = parse_matrix(j["class_means"], where + ".class_means");
  if (j.contains("circle_radius"))
    spec.class_means = means_on_circle(spec.num_ids, j["circle_radius"].get<double>());
  if (j.contains("within_class_std")) spec.within_class_std = j["within_class_std"].get<double>();
  if (j.contains("global_offset")) spec.global_offset = parse_vec(j["global_offset"]);
  if (j.contains("anisotropy")) spec.anisotropy = parse_vec(j["anisotropy"]);
  return spec;
}

json cloud_to_json(const CloudSpec& spec) {
  json j;
  j["num_ids"] = spec.num_ids;
  j["counts"] = spec.counts;
  json means = json::array();
  for (int r = 0; r < spec.class_means.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < spec.class_means.cols(); ++c) row.push_back(spec.class_means(r, c));
    means.push_back(row);
  }
  j["class_means"] = means;
  j["within_class_std"] = spec.within_class_std;
  j["global_offset"] = spec.global_offset;
  j["anisotropy"] = spec.anisotropy;
  return j;
}

}  // namespace

std::string norm_kind_name(NormKind kind) {
  switch (kind) {
    case NormKind::None: return "none";
    case NormKind::BatchNorm: return "batchnorm";
    case NormKind::ProtoNorm: return "protonorm";
  }
  return "none";
}

std::string loss_mode_name(LossMode mode) { return mode == LossMode::OIM ? "oim" : "loim"; }

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.cloud = toy2d_preset();
  // Unlabelled distractors live in a compact pool far from the labelled
  // ring, so the queue supplies negatives without making the identities
  // themselves ambiguous.
  cfg.unlabelled_cloud = cfg.cloud;
  cfg.unlabelled_cloud.num_ids = 8;
  cfg.unlabelled_cloud.counts.assign(8, 1);
  cfg.unlabelled_cloud.class_means = means_on_circle(8, 1.0);
  cfg.unlabelled_cloud.global_offset = {-4.0, -3.0};
  return cfg;
}

ExperimentConfig parse_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, "top level",
             {"seed", "seeds", "out_dir", "norm_layer", "loss", "embedder", "schedule",
              "batch_size", "queue_capacity", "norm", "cloud", "proposals", "unlabelled",
              "grid_resolution", "eval"});

  ExperimentConfig cfg = default_config();
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<uint64_t>>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("norm_layer")) cfg.norm_layer = parse_norm_kind(j["norm_layer"].get<std::string>());

  if (j.contains("loss")) {
    const json& l = j["loss"];
    check_keys(l, "loss", {"mode", "tau", "eta", "epsilon"});
    if (l.contains("mode")) cfg.loss.mode = parse_loss_mode(l["mode"].get<std::string>());
    if (l.contains("tau")) cfg.loss.tau = l["tau"].get<double>();
    if (l.contains("eta")) cfg.loss.eta = l["eta"].get<double>();
    if (l.contains("epsilon")) cfg.loss.epsilon = l["epsilon"].get<double>();
    if (cfg.loss.tau <= 0.0) throw std::runtime_error("config: loss.tau must be > 0");
    if (cfg.loss.eta < 0.0 || cfg.loss.eta > 1.0)
      throw std::runtime_error("config: loss.eta must be in [0,1]");
    if (cfg.loss.epsilon <= 0.0 || cfg.loss.epsilon >= 1.0)
      throw std::runtime_error("config: loss.epsilon must be in (0,1)");
  }

  if (j.contains("embedder")) {
    const json& e = j["embedder"];
    check_keys(e, "embedder", {"in_dim", "hidden_dim", "out_dim", "activation"});
    if (e.contains("in_dim")) cfg.embedder.in_dim = e["in_dim"].get<int>();
    if (e.contains("hidden_dim")) cfg.embedder.hidden_dim = e["hidden_dim"].get<int>();
    if (e.contains("out_dim")) cfg.embedder.out_dim = e["out_dim"].get<int>();
    if (e.contains("activation")) cfg.embedder.activation = parse_activation(e["activation"].get<std::string>());
  }

  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    check_keys(s, "schedule", {"base_lr", "warmup_steps", "decay_epoch", "decay_factor", "total_epochs"});
    if (s.contains("base_lr")) cfg.schedule.base_lr = s["base_lr"].get<double>();
    if (s.contains("warmup_steps")) cfg.schedule.warmup_steps = s["warmup_steps"].get<int>();
    if (s.contains("decay_epoch")) cfg.schedule.decay_epoch = s["decay_epoch"].get<int>();
    if (s.contains("decay_factor")) cfg.schedule.decay_factor = s["decay_factor"].get<double>();
    if (s.contains("total_epochs")) cfg.schedule.total_epochs = s["total_epochs"].get<int>();
    if (cfg.schedule.warmup_steps < 0) throw std::runtime_error("config: schedule.warmup_steps must be >= 0");
    if (cfg.schedule.decay_factor <= 0.0 || cfg.schedule.decay_factor > 1.0)
      throw std::runtime_error("config: schedule.decay_factor must be in (0,1]");
  }

  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
  if (j.contains("queue_capacity")) cfg.queue_capacity = j["queue_capacity"].get<int>();
  if (cfg.batch_size < 1) throw std::runtime_error("config: batch_size must be >= 1");
  if (cfg.queue_capacity < 1) throw std::runtime_error("config: queue_capacity must be >= 1");

  if (j.contains("norm")) {
    const json& n = j["norm"];
    check_keys(n, "norm", {"sigma_floor", "track_momentum", "affine"});
    if (n.contains("sigma_floor")) cfg.sigma_floor = n["sigma_floor"].get<double>();
    if (n.contains("track_momentum")) cfg.track_momentum = n["track_momentum"].get<double>();
    if (n.contains("affine")) cfg.norm_affine = n["affine"].get<bool>();
    if (cfg.sigma_floor <= 0.0) throw std::runtime_error("config: norm.sigma_floor must be > 0");
    if (cfg.track_momentum <= 0.0 || cfg.track_momentum >= 1.0)
      throw std::runtime_error("config: norm.track_momentum must be in (0,1)");
  }

  if (j.contains("cloud")) cfg.cloud = parse_cloud(j["cloud"], "cloud", cfg.cloud);

  if (j.contains("proposals")) {
    const json& p = j["proposals"];
    check_keys(p, "proposals", {"iou_min", "clutter_std", "clutter_mean"});
    if (p.contains("iou_min")) cfg.proposals.iou_min = p["iou_min"].get<double>();
    if (p.contains("clutter_std")) cfg.proposals.clutter_std = p["clutter_std"].get<double>();
    if (p.contains("clutter_mean")) cfg.proposals.clutter_mean = parse_vec(p["clutter_mean"]);
    if (cfg.proposals.iou_min < 0.0) throw std::runtime_error("config: proposals.iou_min must be >= 0");
  }

  if (j.contains("unlabelled")) {
    const json& u = j["unlabelled"];
    check_keys(u, "unlabelled", {"rate", "cloud"});
    if (u.contains("rate")) cfg.unlabelled_rate = u["rate"].get<double>();
    if (u.contains("cloud")) cfg.unlabelled_cloud = parse_cloud(u["cloud"], "unlabelled.cloud", cfg.unlabelled_cloud);
    if (cfg.unlabelled_rate < 0.0) throw std::runtime_error("config: unlabelled.rate must be >= 0");
  }

  if (j.contains("grid_resolution")) cfg.grid_resolution = j["grid_resolution"].get<int>();

  if (j.contains("eval")) {
    const json& e = j["eval"];
    check_keys(e, "eval", {"queries_per_id", "gallery_per_id"});
    if (e.contains("queries_per_id")) cfg.eval_queries_per_id = e["queries_per_id"].get<int>();
    if (e.contains("gallery_per_id")) cfg.eval_gallery_per_id = e["gallery_per_id"].get<int>();
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["norm_layer"] = norm_kind_name(cfg.norm_layer);
  j["loss"] = {{"mode", loss_mode_name(cfg.loss.mode)},
               {"tau", cfg.loss.tau},
               {"eta", cfg.loss.eta},
               {"epsilon", cfg.loss.epsilon}};
  j["embedder"] = {{"in_dim", cfg.embedder.in_dim},
                   {"hidden_dim", cfg.embedder.hidden_dim},
                   {"out_dim", cfg.embedder.out_dim},
                   {"activation", activation_name(cfg.embedder.activation)}};
  j["schedule"] = {{"base_lr", cfg.schedule.base_lr},
                   {"warmup_steps", cfg.schedule.warmup_steps},
                   {"decay_epoch", cfg.schedule.decay_epoch},
                   {"decay_factor", cfg.schedule.decay_factor},
                   {"total_epochs", cfg.schedule.total_epochs}};
  j["batch_size"] = cfg.batch_size;
  j["queue_capacity"] = cfg.queue_capacity;
  j["norm"] = {{"sigma_floor", cfg.sigma_floor},
               {"track_momentum", cfg.track_momentum},
               {"affine", cfg.norm_affine}};
  j["cloud"] = cloud_to_json(cfg.cloud);
  j["proposals"] = {{"iou_min", cfg.proposals.iou_min},
                    {"clutter_std", cfg.proposals.clutter_std},
                    {"clutter_mean", cfg.proposals.clutter_mean}};
  j["unlabelled"] = {{"rate", cfg.unlabelled_rate}, {"cloud", cloud_to_json(cfg.unlabelled_cloud)}};
  j["grid_resolution"] = cfg.grid_resolution;
  j["eval"] = {{"queries_per_id", cfg.eval_queries_per_id},
               {"gallery_per_id", cfg.eval_gallery_per_id}};
  return j.dump(2) + "\n";
}

}  // namespace oim
