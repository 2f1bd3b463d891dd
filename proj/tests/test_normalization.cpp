#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "gradcheck_util.hpp"
#include "oim/normalization.hpp"
#include "oim/rng.hpp"

using namespace oim;

namespace {

FeatureBatch make_batch(const std::vector<Vec>& rows, const std::vector<IdTag>& tags) {
  FeatureBatch fb;
  fb.features = Matrix(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) fb.features.set_row(static_cast<int>(i), rows[i]);
  fb.tags = tags;
  return fb;
}

// The running hand example: D=1, features [0,0,0,0,4], tags [L1 x4, L2].
FeatureBatch hand_batch() {
  return make_batch({{0}, {0}, {0}, {0}, {4}},
                    {IdTag::label(0), IdTag::label(0), IdTag::label(0), IdTag::label(0),
                     IdTag::label(1)});
}

FeatureBatch random_batch(Rng& rng, int b_size, int dim, int num_tags, double unlabelled_p = 0.0) {
  FeatureBatch fb;
  fb.features = Matrix(b_size, dim);
  for (int b = 0; b < b_size; ++b)
    for (int d = 0; d < dim; ++d) fb.features(b, d) = rng.normal() * 2.0 + 0.5;
  fb.tags.resize(b_size);
  for (int b = 0; b < b_size; ++b)
    fb.tags[b] = rng.uniform() < unlabelled_p ? IdTag::unlabelled(b)
                                              : IdTag::label(rng.uniform_int(0, num_tags - 1));
  return fb;
}

}  // namespace

TEST_CASE("compute_prototypes: hand example") {
  PrototypeSet p = compute_prototypes(hand_batch());
  REQUIRE(p.num_prototypes() == 2);
  CHECK(p.prototypes(0, 0) == doctest::Approx(0.0));
  CHECK(p.prototypes(1, 0) == doctest::Approx(4.0));
  CHECK(p.counts[0] == 4);
  CHECK(p.counts[1] == 1);
}

TEST_CASE("compute_prototypes: singleton tags reproduce the features") {
  Rng rng(1);
  FeatureBatch fb = random_batch(rng, 4, 3, 4);
  for (int b = 0; b < 4; ++b) fb.tags[b] = IdTag::label(b);
  PrototypeSet p = compute_prototypes(fb);
  REQUIRE(p.num_prototypes() == 4);
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 3; ++d) CHECK(p.prototypes(b, d) == doctest::Approx(fb.features(b, d)));
}

TEST_CASE("compute_prototypes: one shared tag gives the batch mean") {
  Rng rng(2);
  FeatureBatch fb = random_batch(rng, 5, 2, 1);
  for (auto& t : fb.tags) t = IdTag::label(0);
  PrototypeSet p = compute_prototypes(fb);
  REQUIRE(p.num_prototypes() == 1);
  for (int d = 0; d < 2; ++d) {
    double mean = 0;
    for (int b = 0; b < 5; ++b) mean += fb.features(b, d) / 5;
    CHECK(p.prototypes(0, d) == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("compute_prototypes: unlabelled instances are singletons") {
  FeatureBatch fb = make_batch({{1}, {2}, {3}},
                               {IdTag::label(0), IdTag::unlabelled(0), IdTag::unlabelled(1)});
  PrototypeSet p = compute_prototypes(fb);
  CHECK(p.num_prototypes() == 3);
}

TEST_CASE("protonorm_stats: hand example mu=2 sigma=2") {
  NormStats s = protonorm_stats(hand_batch());
  CHECK(s.mu[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("batchnorm_stats: hand example mu=0.8 sigma=1.6") {
  NormStats s = batchnorm_stats(hand_batch());
  CHECK(s.mu[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(s.sigma[0] == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("balanced batches: protonorm stats collapse to batchnorm stats") {
  Rng rng(3);
  for (int it = 0; it < 20; ++it) {
    const int per_tag = rng.uniform_int(1, 4);
    const int tags = rng.uniform_int(1, 4);
    const int dim = rng.uniform_int(1, 5);
    FeatureBatch fb;
    fb.features = Matrix(per_tag * tags, dim);
    for (int b = 0; b < fb.features.rows(); ++b)
      for (int d = 0; d < dim; ++d) fb.features(b, d) = rng.normal();
    for (int t = 0; t < tags; ++t)
      for (int i = 0; i < per_tag; ++i) fb.tags.push_back(IdTag::label(t));
    NormStats pn = protonorm_stats(fb), bn = batchnorm_stats(fb);
    for (int d = 0; d < dim; ++d) {
      CHECK(pn.mu[d] == doctest::Approx(bn.mu[d]).epsilon(1e-12));
      CHECK(pn.sigma[d] == doctest::Approx(bn.sigma[d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("duplicating one ID's samples moves batchnorm mu but not protonorm mu") {
  Rng rng(4);
  FeatureBatch fb = random_batch(rng, 6, 3, 3);
  NormStats pn_before = protonorm_stats(fb);
  NormStats bn_before = batchnorm_stats(fb);

  FeatureBatch dup = fb;
  const IdTag dup_tag = fb.tags[0];
  for (int b = 0; b < fb.size(); ++b) {
    if (!(fb.tags[b] == dup_tag)) continue;
    Matrix bigger(dup.features.rows() + 1, 3);
    for (int r = 0; r < dup.features.rows(); ++r) bigger.set_row(r, dup.features.row_vec(r));
    bigger.set_row(dup.features.rows(), fb.features.row_vec(b));
    dup.features = bigger;
    dup.tags.push_back(dup_tag);
  }
  NormStats pn_after = protonorm_stats(dup);
  NormStats bn_after = batchnorm_stats(dup);
  double bn_shift = 0;
  for (int d = 0; d < 3; ++d) {
    CHECK(pn_after.mu[d] == doctest::Approx(pn_before.mu[d]).epsilon(1e-12));
    bn_shift += std::fabs(bn_after.mu[d] - bn_before.mu[d]);
  }
  CHECK(bn_shift > 1e-6);
}

TEST_CASE("mean weights are 1/(K*count) and sum to 1") {
  Rng rng(5);
  for (int it = 0; it < 30; ++it) {
    FeatureBatch fb = random_batch(rng, rng.uniform_int(2, 10), 2, rng.uniform_int(1, 4), 0.2);
    Vec w = mean_weights(fb, NormKind::ProtoNorm);
    PrototypeSet p = compute_prototypes(fb);
    const int k_total = p.num_prototypes();
    double sum = 0;
    for (int b = 0; b < fb.size(); ++b) {
      int count = 0;
      for (size_t k = 0; k < p.ids.size(); ++k)
        if (p.ids[k] == fb.tags[b]) count = p.counts[k];
      CHECK(w[b] == doctest::Approx(1.0 / (k_total * count)).epsilon(1e-12));
      sum += w[b];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("protonorm_forward: hand example standardizes to [-1,-1,-1,-1,1]") {
  NormLayer layer(NormKind::ProtoNorm);
  Matrix out = layer.forward(hand_batch(), Mode::Train);
  for (int b = 0; b < 4; ++b) CHECK(out(b, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out(4, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("protonorm_forward: already-standardized batch is unchanged") {
  // prototype-mean 0 and sigma 1 per channel: two singleton tags at -1, 1...
  // use [-1, 1] with distinct labels: prototypes are the samples, mu = 0,
  // sigma = sqrt((1+1)/2) = 1.
  FeatureBatch fb = make_batch({{-1}, {1}}, {IdTag::label(0), IdTag::label(1)});
  NormLayer layer(NormKind::ProtoNorm);
  Matrix out = layer.forward(fb, Mode::Train);
  CHECK(out(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eval mode with identity running stats is the identity") {
  NormLayer layer(NormKind::ProtoNorm);
  layer.running().mu = {0.0};
  layer.running().var = {1.0};
  layer.running().batches_seen = 1;
  FeatureBatch fb = make_batch({{0.7}, {-0.3}}, {IdTag::label(0), IdTag::label(1)});
  Matrix out = layer.forward(fb, Mode::Eval);
  CHECK(out(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(out(1, 0) == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("eval mode with uninitialized running stats throws") {
  NormLayer layer(NormKind::ProtoNorm);
  FeatureBatch fb = hand_batch();
  CHECK_THROWS_AS(layer.forward(fb, Mode::Eval), std::runtime_error);
}

TEST_CASE("update_running: initialization and EMA") {
  RunningStats r;
  r.track_momentum = 0.1;
  NormStats s;
  s.mu = {2.0};
  s.var = {4.0};
  s.sigma = {2.0};
  update_running(r, s);
  CHECK(r.mu[0] == doctest::Approx(2.0));
  CHECK(r.var[0] == doctest::Approx(4.0));

  RunningStats r2;
  r2.track_momentum = 0.1;
  NormStats zero{{0.0}, {0.0}, {1e-5}};
  update_running(r2, zero);
  NormStats one{{1.0}, {1.0}, {1.0}};
  update_running(r2, one);
  CHECK(r2.mu[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("update_running: repeated identical batches converge") {
  RunningStats r;
  r.track_momentum = 0.1;
  NormStats s{{3.0}, {2.0}, {std::sqrt(2.0)}};
  for (int i = 0; i < 500; ++i) update_running(r, s);
  CHECK(std::fabs(r.mu[0] - 3.0) < 1e-9);
  CHECK(std::fabs(r.var[0] - 2.0) < 1e-9);
}

TEST_CASE("train-mode output has zero prototype mean") {
  Rng rng(6);
  for (int it = 0; it < 20; ++it) {
    FeatureBatch fb = random_batch(rng, rng.uniform_int(2, 12), 3, rng.uniform_int(1, 5));
    NormLayer layer(NormKind::ProtoNorm);
    Matrix out = layer.forward(fb, Mode::Train);
    FeatureBatch out_batch{out, fb.tags};
    PrototypeSet p = compute_prototypes(out_batch);
    for (int d = 0; d < 3; ++d) {
      double mean = 0;
      for (int k = 0; k < p.num_prototypes(); ++k) mean += p.prototypes(k, d);
      CHECK(std::fabs(mean / p.num_prototypes()) < 1e-9);
    }
  }
}

TEST_CASE("backward: zero upstream gives zero gradient") {
  Rng rng(8);
  FeatureBatch fb = random_batch(rng, 5, 3, 2);
  Matrix zero(5, 3);
  Matrix g = standardize_backward(fb, zero, NormKind::ProtoNorm);
  for (int b = 0; b < 5; ++b)
    for (int d = 0; d < 3; ++d) CHECK(g(b, d) == 0.0);
}

TEST_CASE("backward: uniform-weight gradient sums to zero per channel") {
  // balanced tags => weights uniform; constant upstream on one channel
  Rng rng(9);
  FeatureBatch fb;
  fb.features = Matrix(6, 2);
  for (int b = 0; b < 6; ++b)
    for (int d = 0; d < 2; ++d) fb.features(b, d) = rng.normal();
  for (int t = 0; t < 3; ++t) {
    fb.tags.push_back(IdTag::label(t));
    fb.tags.push_back(IdTag::label(t));
  }
  Matrix upstream(6, 2);
  for (int b = 0; b < 6; ++b) upstream(b, 0) = 1.0;
  Matrix g = standardize_backward(fb, upstream, NormKind::ProtoNorm);
  double col_sum = 0;
  for (int b = 0; b < 6; ++b) col_sum += g(b, 0);
  CHECK(std::fabs(col_sum) < 1e-12);
}

TEST_CASE("protonorm and batchnorm backward match finite differences") {
  Rng rng(10);
  for (NormKind kind : {NormKind::ProtoNorm, NormKind::BatchNorm}) {
    double worst = 0.0;
    for (int it = 0; it < 40; ++it) {
      const int b_size = rng.uniform_int(2, 8);
      const int dim = rng.uniform_int(1, 4);
      FeatureBatch fb = random_batch(rng, b_size, dim, rng.uniform_int(1, b_size));
      Matrix upstream(b_size, dim);
      for (int b = 0; b < b_size; ++b)
        for (int d = 0; d < dim; ++d) upstream(b, d) = rng.normal();
      Matrix grad = standardize_backward(fb, upstream, kind);
      auto loss_of = [&](FeatureBatch& batch) {
        NormStats stats =
            kind == NormKind::ProtoNorm ? protonorm_stats(batch) : batchnorm_stats(batch);
        Matrix y = standardize_forward(batch, stats);
        double s = 0;
        for (int b = 0; b < b_size; ++b)
          for (int d = 0; d < dim; ++d) s += upstream(b, d) * y(b, d);
        return s;
      };
      for (int b = 0; b < b_size; ++b)
        for (int d = 0; d < dim; ++d) {
          const double fd = gradcheck::central_diff(
              [&](double x) {
                FeatureBatch pert = fb;
                pert.features(b, d) = x;
                return loss_of(pert);
              },
              fb.features(b, d));
          worst = std::max(worst, gradcheck::rel_err(grad(b, d), fd));
        }
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("one sample per tag: protonorm equals batchnorm forward") {
  Rng rng(12);
  FeatureBatch fb = random_batch(rng, 5, 3, 5);
  for (int b = 0; b < 5; ++b) fb.tags[b] = IdTag::label(b);
  NormLayer pn(NormKind::ProtoNorm), bn(NormKind::BatchNorm);
  Matrix a = pn.forward(fb, Mode::Train);
  Matrix b = bn.forward(fb, Mode::Train);
  for (int i = 0; i < 5; ++i)
    for (int d = 0; d < 3; ++d) CHECK(a(i, d) == doctest::Approx(b(i, d)).epsilon(1e-12));
}

TEST_CASE("single shared tag is legal: K=1") {
  FeatureBatch fb = make_batch({{1}, {3}}, {IdTag::label(0), IdTag::label(0)});
  NormStats s = protonorm_stats(fb);
  CHECK(s.mu[0] == doctest::Approx(2.0));  // the single prototype
}

TEST_CASE("sigma floor engages on degenerate channels") {
  FeatureBatch fb = make_batch({{5}, {5}}, {IdTag::label(0), IdTag::label(1)});
  NormStats s = protonorm_stats(fb);
  CHECK(s.sigma[0] == 1e-5);
}
