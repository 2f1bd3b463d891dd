#ifndef OIM_SYNTHDATA_HPP_
#define OIM_SYNTHDATA_HPP_

#include <utility>
#include <vector>

#include "oim/batch.hpp"
#include "oim/matrix.hpp"
#include "oim/memory_bank.hpp"
#include "oim/rng.hpp"

namespace oim {

// Long-tailed labelled feature cloud. Sample b of class k is
// mean_k + anisotropy .* N(0, std^2) + global_offset.
struct CloudSpec {
  int num_ids = 6;
  std::vector<int> counts;      // per-ID sample counts
  Matrix class_means;           // num_ids x in_dim
  double within_class_std = 0.35;
  Vec global_offset;            // length in_dim
  Vec anisotropy;               // per-dim scale, length in_dim

  int dim() const { return class_means.cols(); }
};

// IoU-parameterized proposal corruption: mix the ground-truth vector with
// clutter drawn from an isotropic gaussian, then project to the sphere.
struct ProposalSpec {
  double iou_min = 0.5;         // positive-proposal IoU floor
  double clutter_std = 1.0;
  Vec clutter_mean;             // empty = zero
};

struct UnlabelledSpec {
  double rate = 0.0;            // unlabelled instances per labelled sample
  CloudSpec cloud;              // their own cloud parameters
};

// Class means evenly spaced on a circle of the given radius (2D helper).
Matrix means_on_circle(int num_ids, double radius);

// The long-tailed 2D preset: 6 IDs on a radius-3 circle, two adjacent IDs at
// 4x count, offset (2,1), anisotropy (1.0, 0.4), std 0.35.
CloudSpec toy2d_preset();

std::pair<Matrix, std::vector<IdTag>> gen_cloud(const CloudSpec& spec, Rng& rng);

// counts[k] = clamp(round(base / (k+1)^s), n_min, n_max), minimum 1.
std::vector<int> gen_longtail_counts(int num_ids, double zipf_s, int n_min, int n_max, int base);

// feature = l2_normalize(s*gt + (1-s)*clutter); carries iou = s.
Proposal gen_proposal(const Vec& gt_feature, double s, const IdTag& tag, const ProposalSpec& spec,
                      Rng& rng);

}  // namespace oim

#endif  // OIM_SYNTHDATA_HPP_
