#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "oim/metrics.hpp"
#include "oim/rng.hpp"

using namespace oim;

TEST_CASE("avg_pairwise_cosine: identical and orthogonal pairs") {
  Matrix m(2, 2);
  m(0, 0) = 1;
  m(1, 0) = 1;
  PairwiseCosine r = avg_pairwise_cosine(m);
  CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.std == doctest::Approx(0.0).epsilon(1e-9));

  Matrix o(2, 2);
  o(0, 0) = 1;
  o(1, 1) = 1;
  CHECK(avg_pairwise_cosine(o).mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("avg_pairwise_cosine: fewer than two nonzero rows throws") {
  Matrix m(3, 2);
  m(0, 0) = 1;  // one nonzero row, two zero rows
  CHECK_THROWS_AS(avg_pairwise_cosine(m), std::invalid_argument);
}

TEST_CASE("avg_pairwise_cosine matches the brute-force double loop") {
  Rng rng(60);
  for (int it = 0; it < 20; ++it) {
    const int n = rng.uniform_int(2, 8);
    const int dim = rng.uniform_int(2, 5);
    Matrix m(n, dim);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) m(i, d) = rng.normal();
    PairwiseCosine r = avg_pairwise_cosine(m);

    // independent recomputation
    double sum = 0;
    int pairs = 0;
    std::vector<double> vals;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double num = 0, ni = 0, nj = 0;
        for (int d = 0; d < dim; ++d) {
          num += m(i, d) * m(j, d);
          ni += m(i, d) * m(i, d);
          nj += m(j, d) * m(j, d);
        }
        vals.push_back(num / std::sqrt(ni * nj));
        sum += vals.back();
        ++pairs;
      }
    const double mean = sum / pairs;
    double var = 0;
    for (double v : vals) var += (v - mean) * (v - mean);
    CHECK(r.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(r.std == doctest::Approx(std::sqrt(var / pairs)).epsilon(1e-9));
    CHECK(r.num_pairs == pairs);
  }
}

TEST_CASE("retrieval_eval: perfect ranking gives mAP 1 and rank-1 1") {
  // gallery contains one close positive per query
  Matrix q(2, 2), g(4, 2);
  q(0, 0) = 1;
  q(1, 1) = 1;
  g(0, 0) = 0.99;
  g(0, 1) = 0.14;  // positive for q0
  g(1, 1) = 1;     // positive for q1
  g(2, 0) = -1;    // negatives
  g(3, 1) = -1;
  RetrievalReport r = retrieval_eval(q, {0, 1}, g, {0, 1, 2, 3});
  CHECK(r.mAP == doctest::Approx(1.0));
  CHECK(r.rank1 == doctest::Approx(1.0));
}

TEST_CASE("retrieval_eval: hand AP with positives at ranks 1 and 3 of 4") {
  // query along x; gallery similarities 0.9, 0.8, 0.7, 0.6 with positives
  // at ranks 1 and 3
  Matrix q(1, 2);
  q(0, 0) = 1;
  Matrix g(4, 2);
  const double sims[] = {0.9, 0.8, 0.7, 0.6};
  for (int i = 0; i < 4; ++i) {
    g(i, 0) = sims[i];
    g(i, 1) = std::sqrt(1 - sims[i] * sims[i]);
  }
  RetrievalReport r = retrieval_eval(q, {0}, g, {0, 1, 0, 1});
  CHECK(r.mAP == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(r.rank1 == doctest::Approx(1.0));
}

TEST_CASE("retrieval_eval: query with no positive throws, or is skipped under the flag") {
  Matrix q(1, 2), g(2, 2);
  q(0, 0) = 1;
  g(0, 0) = 1;
  g(1, 1) = 1;
  CHECK_THROWS_AS(retrieval_eval(q, {5}, g, {0, 1}), std::invalid_argument);
  Matrix q2(2, 2);
  q2(0, 0) = 1;
  q2(1, 1) = 1;
  RetrievalReport r = retrieval_eval(q2, {0, 5}, g, {0, 1}, true);
  CHECK(r.per_query_ap.size() == 1);
}

TEST_CASE("retrieval_eval: shuffled labels give chance-level rank-1") {
  Rng rng(61);
  const int n = 40;
  const int num_ids = 4;  // positive rate for rank-1 under the null
  double mean_rank1 = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    Matrix q(n, 3), g(n, 3);
    std::vector<int> q_ids(n), g_ids(n);
    for (int i = 0; i < n; ++i) {
      Vec a = l2_normalize(rng.normal_vec(3)), b = l2_normalize(rng.normal_vec(3));
      q.set_row(i, a);
      g.set_row(i, b);
      q_ids[i] = i % num_ids;
      g_ids[i] = rng.uniform_int(0, num_ids - 1);
    }
    mean_rank1 += retrieval_eval(q, q_ids, g, g_ids, true).rank1 / trials;
  }
  // null baseline 1/num_ids; generous band for the finite sample
  CHECK(std::fabs(mean_rank1 - 1.0 / num_ids) < 0.03);
}

TEST_CASE("angular_occupancy: uniform square layout") {
  Matrix m(4, 2);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 0) = -1;
  m(3, 1) = -1;
  AngularReport r = angular_occupancy(m);
  for (double g : r.gaps) CHECK(g == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(r.gap_std == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.min_gap == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
}

TEST_CASE("angular_occupancy: two rows at 0 and 10 degrees") {
  const double ten_deg = 10.0 * std::numbers::pi / 180.0;
  Matrix m(2, 2);
  m(0, 0) = 1;
  m(1, 0) = std::cos(ten_deg);
  m(1, 1) = std::sin(ten_deg);
  AngularReport r = angular_occupancy(m);
  CHECK(r.min_gap == doctest::Approx(ten_deg).epsilon(1e-12));
  const double big = 2 * std::numbers::pi - ten_deg;
  CHECK((r.gaps[0] == doctest::Approx(ten_deg) || r.gaps[1] == doctest::Approx(ten_deg)));
  CHECK((r.gaps[0] == doctest::Approx(big) || r.gaps[1] == doctest::Approx(big)));
}

TEST_CASE("angular_occupancy: gaps sum to 2*pi and survive rotation") {
  Rng rng(62);
  for (int it = 0; it < 30; ++it) {
    const int k = rng.uniform_int(2, 8);
    Matrix m(k, 2);
    for (int i = 0; i < k; ++i) {
      m(i, 0) = rng.normal();
      m(i, 1) = rng.normal();
      if (std::fabs(m(i, 0)) + std::fabs(m(i, 1)) < 1e-6) m(i, 0) = 1.0;
    }
    AngularReport r = angular_occupancy(m);
    double sum = 0;
    for (double g : r.gaps) sum += g;
    CHECK(sum == doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));

    const double theta = rng.uniform(0, 2 * std::numbers::pi);
    Matrix rot(k, 2);
    for (int i = 0; i < k; ++i) {
      rot(i, 0) = std::cos(theta) * m(i, 0) - std::sin(theta) * m(i, 1);
      rot(i, 1) = std::sin(theta) * m(i, 0) + std::cos(theta) * m(i, 1);
    }
    AngularReport r2 = angular_occupancy(rot);
    CHECK(r2.min_gap == doctest::Approx(r.min_gap).epsilon(1e-9));
    CHECK(r2.gap_std == doctest::Approx(r.gap_std).epsilon(1e-9));
  }
}

TEST_CASE("angular_occupancy: D != 2 throws") {
  Matrix m(3, 3, 1.0);
  CHECK_THROWS_AS(angular_occupancy(m), std::invalid_argument);
}

TEST_CASE("decision_grid: single class covers the whole grid") {
  LookupTable lut(1, 2);
  lut.update_oim(0, {1, 0}, 0.0);
  auto grid = decision_grid(lut, {-1, 1, -1, 1}, 8, [](const Vec& g) { return g; });
  for (const auto& row : grid)
    for (int c : row) CHECK(c == 0);
}

TEST_CASE("decision_grid: antipodal rows split the plane through the origin") {
  LookupTable lut(2, 2);
  lut.update_oim(0, {1, 0}, 0.0);
  lut.update_oim(1, {-1, 0}, 0.0);
  auto grid = decision_grid(lut, {-2, 2, -2, 2}, 16, [](const Vec& g) { return g; });
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      const double x = -2 + 4.0 * (j + 0.5) / 16;
      CHECK(grid[i][j] == (x > 0 ? 0 : 1));
    }
}

TEST_CASE("decision_grid: argmax invariant to a positive rescale of the LUT rows") {
  // temperature only rescales logits; argmax over v.x is unchanged
  Rng rng(63);
  LookupTable lut(3, 2);
  for (int l = 0; l < 3; ++l) lut.update_oim(l, l2_normalize(rng.normal_vec(2)), 0.0);
  auto base = decision_grid(lut, {-1, 1, -1, 1}, 8, [](const Vec& g) { return g; });
  auto scaled = decision_grid(lut, {-1, 1, -1, 1}, 8, [](const Vec& g) {
    return Vec{3.0 * g[0], 3.0 * g[1]};
  });
  CHECK(base == scaled);
}
