#ifndef OIM_METRICS_HPP_
#define OIM_METRICS_HPP_

#include <functional>
#include <vector>

#include "oim/matrix.hpp"
#include "oim/memory_bank.hpp"

namespace oim {

struct PairwiseCosine {
  double mean = 0.0;
  double std = 0.0;
  int num_pairs = 0;
};

// Mean/std of cosine similarity over all unordered distinct pairs of the
// nonzero rows. Throws with fewer than two nonzero rows.
PairwiseCosine avg_pairwise_cosine(const Matrix& rows);

struct SeparabilityReport {
  int epoch = 0;
  PairwiseCosine lut;
  PairwiseCosine queue;
  PairwiseCosine combined;
};

SeparabilityReport separability(const LookupTable& lut, const CircularQueue& queue, int epoch);

struct RetrievalReport {
  double mAP = 0.0;
  double rank1 = 0.0;
  Vec per_query_ap;
};

// Cosine ranking, ties broken by ascending gallery index. AP is the mean of
// precision at each positive. Queries with no gallery positive throw, or are
// skipped when skip_empty is set.
RetrievalReport retrieval_eval(const Matrix& queries, const std::vector<int>& query_ids,
                               const Matrix& gallery, const std::vector<int>& gallery_ids,
                               bool skip_empty = false);

struct AngularReport {
  Vec angles;       // per-prototype, sorted ascending
  Vec gaps;         // circular gaps between consecutive angles, sum 2*pi
  double min_gap = 0.0;
  double gap_std = 0.0;
};

// 2D only: angular occupancy of the nonzero prototype rows.
AngularReport angular_occupancy(const Matrix& prototypes_2d);

// Argmax-LUT assignment over a 2D grid. pipeline maps a grid point to the raw
// feature that is then L2-normalized and scored against every LUT row.
struct GridBounds {
  double x_min, x_max, y_min, y_max;
};

std::vector<std::vector<int>> decision_grid(const LookupTable& lut, const GridBounds& bounds,
                                            int resolution,
                                            const std::function<Vec(const Vec&)>& pipeline);

}  // namespace oim

#endif  // OIM_METRICS_HPP_
