#include "oim/synthdata.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oim {

Matrix means_on_circle(int num_ids, double radius) {
  Matrix m(num_ids, 2);
  for (int k = 0; k < num_ids; ++k) {
    const double a = 2.0 * std::numbers::pi * k / num_ids;
    m(k, 0) = radius * std::cos(a);
    m(k, 1) = radius * std::sin(a);
  }
  return m;
}

CloudSpec toy2d_preset() {
  CloudSpec spec;
  spec.num_ids = 6;
  spec.counts = {40, 40, 10, 10, 10, 10};  // two adjacent 4x classes
  spec.class_means = means_on_circle(6, 3.0);
  spec.within_class_std = 0.35;
  spec.global_offset = {2.0, 1.0};
  spec.anisotropy = {1.0, 0.4};
  return spec;
}

std::pair<Matrix, std::vector<IdTag>> gen_cloud(const CloudSpec& spec, Rng& rng) {
  if (spec.num_ids < 1 || static_cast<int>(spec.counts.size()) != spec.num_ids)
    throw std::invalid_argument("gen_cloud: counts must have one entry per ID");
  if (spec.within_class_std < 0.0)
    throw std::invalid_argument("gen_cloud: within_class_std must be >= 0");
  const int dim = spec.dim();
  const Vec offset = spec.global_offset.empty() ? Vec(dim, 0.0) : spec.global_offset;
  const Vec aniso = spec.anisotropy.empty() ? Vec(dim, 1.0) : spec.anisotropy;

  int total = 0;
  for (int c : spec.counts) {
    if (c < 1) throw std::invalid_argument("gen_cloud: counts must be >= 1");
    total += c;
  }
  Matrix features(total, dim);
  std::vector<IdTag> tags;
  tags.reserve(total);
  int row = 0;
  for (int k = 0; k < spec.num_ids; ++k) {
    for (int i = 0; i < spec.counts[k]; ++i) {
      double* x = features.row(row);
      for (int d = 0; d < dim; ++d)
        x[d] = spec.class_means(k, d) + aniso[d] * spec.within_class_std * rng.normal() + offset[d];
      tags.push_back(IdTag::label(k));
      ++row;
    }
  }
  return {std::move(features), std::move(tags)};
}

std::vector<int> gen_longtail_counts(int num_ids, double zipf_s, int n_min, int n_max, int base) {
  if (num_ids < 1) throw std::invalid_argument("gen_longtail_counts: num_ids must be >= 1");
  std::vector<int> counts(num_ids);
  for (int k = 0; k < num_ids; ++k) {
    double c = base / std::pow(static_cast<double>(k + 1), zipf_s);
    int n = static_cast<int>(std::lround(c));
    if (n < n_min) n = n_min;
    if (n > n_max) n = n_max;
    if (n < 1) n = 1;
    counts[k] = n;
  }
  return counts;
}

Proposal gen_proposal(const Vec& gt_feature, double s, const IdTag& tag, const ProposalSpec& spec,
                      Rng& rng) {
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("gen_proposal: s must be in [0,1]");
  const int dim = static_cast<int>(gt_feature.size());
  Vec mixed(dim);
  for (int d = 0; d < dim; ++d) {
    double clutter = spec.clutter_std * rng.normal();
    if (!spec.clutter_mean.empty()) clutter += spec.clutter_mean[d];
    mixed[d] = s * gt_feature[d] + (1.0 - s) * clutter;
  }
  return Proposal{l2_normalize(mixed), tag, s};
}

}  // namespace oim
