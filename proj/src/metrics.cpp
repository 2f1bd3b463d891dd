#include "oim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oim {

namespace {

std::vector<Vec> nonzero_rows(const Matrix& m) {
  std::vector<Vec> rows;
  for (int i = 0; i < m.rows(); ++i) {
    Vec r = m.row_vec(i);
    if (norm2(r) > 0.0) rows.push_back(std::move(r));
  }
  return rows;
}

double cosine(const Vec& a, const Vec& b) { return dot(a, b) / (norm2(a) * norm2(b)); }

}  // namespace

PairwiseCosine avg_pairwise_cosine(const Matrix& rows) {
  const std::vector<Vec> r = nonzero_rows(rows);
  const int n = static_cast<int>(r.size());
  if (n < 2) throw std::invalid_argument("avg_pairwise_cosine: need >= 2 nonzero rows");
  double sum = 0.0, sum_sq = 0.0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double c = cosine(r[i], r[j]);
      sum += c;
      sum_sq += c * c;
      ++pairs;
    }
  PairwiseCosine out;
  out.num_pairs = pairs;
  out.mean = sum / pairs;
  out.std = std::sqrt(std::max(0.0, sum_sq / pairs - out.mean * out.mean));
  return out;
}

SeparabilityReport separability(const LookupTable& lut, const CircularQueue& queue, int epoch) {
  SeparabilityReport rep;
  rep.epoch = epoch;
  rep.lut = avg_pairwise_cosine(lut.entries());
  const Matrix q = queue.active_negatives();
  if (q.rows() >= 2) rep.queue = avg_pairwise_cosine(q);
  Matrix combined(lut.num_ids() + q.rows(), lut.dim());
  for (int i = 0; i < lut.num_ids(); ++i) combined.set_row(i, lut.entries().row_vec(i));
  for (int i = 0; i < q.rows(); ++i) combined.set_row(lut.num_ids() + i, q.row_vec(i));
  rep.combined = avg_pairwise_cosine(combined);
  return rep;
}

RetrievalReport retrieval_eval(const Matrix& queries, const std::vector<int>& query_ids,
                               const Matrix& gallery, const std::vector<int>& gallery_ids,
                               bool skip_empty) {
  const int num_q = queries.rows();
  const int num_g = gallery.rows();
  RetrievalReport rep;
  int rank1_hits = 0, counted = 0;
  for (int q = 0; q < num_q; ++q) {
    int positives = 0;
    for (int g = 0; g < num_g; ++g)
      if (gallery_ids[g] == query_ids[q]) ++positives;
    if (positives == 0) {
      if (skip_empty) continue;
      throw std::invalid_argument("retrieval_eval: query has no gallery positive");
    }
    const Vec qv = queries.row_vec(q);
    std::vector<int> order(num_g);
    std::iota(order.begin(), order.end(), 0);
    Vec sims(num_g);
    for (int g = 0; g < num_g; ++g) sims[g] = dot(qv, gallery.row_vec(g));
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sims[a] > sims[b]; });

    double ap = 0.0;
    int hits = 0;
    for (int rank = 0; rank < num_g; ++rank) {
      if (gallery_ids[order[rank]] == query_ids[q]) {
        ++hits;
        ap += static_cast<double>(hits) / (rank + 1);
      }
    }
    ap /= positives;
    rep.per_query_ap.push_back(ap);
    if (gallery_ids[order[0]] == query_ids[q]) ++rank1_hits;
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("retrieval_eval: no usable queries");
  rep.mAP = std::accumulate(rep.per_query_ap.begin(), rep.per_query_ap.end(), 0.0) / counted;
  rep.rank1 = static_cast<double>(rank1_hits) / counted;
  return rep;
}

AngularReport angular_occupancy(const Matrix& prototypes_2d) {
  if (prototypes_2d.cols() != 2) throw std::invalid_argument("angular_occupancy: D must be 2");
  const std::vector<Vec> rows = nonzero_rows(prototypes_2d);
  if (rows.size() < 2) throw std::invalid_argument("angular_occupancy: need >= 2 nonzero rows");

  AngularReport rep;
  for (const Vec& r : rows) rep.angles.push_back(std::atan2(r[1], r[0]));
  std::sort(rep.angles.begin(), rep.angles.end());
  const int k = static_cast<int>(rep.angles.size());
  for (int i = 0; i + 1 < k; ++i) rep.gaps.push_back(rep.angles[i + 1] - rep.angles[i]);
  rep.gaps.push_back(2.0 * std::numbers::pi - (rep.angles.back() - rep.angles.front()));

  rep.min_gap = *std::min_element(rep.gaps.begin(), rep.gaps.end());
  double mean = std::accumulate(rep.gaps.begin(), rep.gaps.end(), 0.0) / k;
  double var = 0.0;
  for (double g : rep.gaps) var += (g - mean) * (g - mean);
  rep.gap_std = std::sqrt(var / k);
  return rep;
}

std::vector<std::vector<int>> decision_grid(const LookupTable& lut, const GridBounds& bounds,
                                            int resolution,
                                            const std::function<Vec(const Vec&)>& pipeline) {
  std::vector<std::vector<int>> grid(resolution, std::vector<int>(resolution, 0));
  for (int i = 0; i < resolution; ++i) {
    const double y = bounds.y_min + (bounds.y_max - bounds.y_min) * (i + 0.5) / resolution;
    for (int j = 0; j < resolution; ++j) {
      const double x = bounds.x_min + (bounds.x_max - bounds.x_min) * (j + 0.5) / resolution;
      const Vec feat = l2_normalize(pipeline(Vec{x, y}));
      int best = 0;
      double best_score = -1e300;
      for (int l = 0; l < lut.num_ids(); ++l) {
        double s = 0.0;
        const double* v = lut.entries().row(l);
        for (int d = 0; d < lut.dim(); ++d) s += v[d] * feat[d];
        if (s > best_score) {
          best_score = s;
          best = l;
        }
      }
      grid[i][j] = best;
    }
  }
  return grid;
}

}  // namespace oim
