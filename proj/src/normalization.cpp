#include "oim/normalization.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace oim {

PrototypeSet compute_prototypes(const FeatureBatch& batch) {
  const int b_size = batch.size();
  const int dim = batch.dim();
  if (b_size < 1) throw std::invalid_argument("compute_prototypes: empty batch");
  assert(static_cast<int>(batch.tags.size()) == b_size);

  PrototypeSet out;
  std::vector<int> row_of_tag;  // prototype index per sample
  row_of_tag.reserve(b_size);
  for (int b = 0; b < b_size; ++b) {
    const IdTag& tag = batch.tags[b];
    int k = -1;
    for (size_t i = 0; i < out.ids.size(); ++i) {
      if (out.ids[i] == tag) {
        k = static_cast<int>(i);
        break;
      }
    }
    if (k < 0) {
      k = static_cast<int>(out.ids.size());
      out.ids.push_back(tag);
      out.counts.push_back(0);
    }
    out.counts[k] += 1;
    row_of_tag.push_back(k);
  }

  const int k_total = static_cast<int>(out.ids.size());
  out.prototypes = Matrix(k_total, dim);
  for (int b = 0; b < b_size; ++b) {
    const double* x = batch.features.row(b);
    double* p = out.prototypes.row(row_of_tag[b]);
    for (int d = 0; d < dim; ++d) p[d] += x[d];
  }
  for (int k = 0; k < k_total; ++k) {
    double* p = out.prototypes.row(k);
    for (int d = 0; d < dim; ++d) p[d] /= out.counts[k];
  }
  return out;
}

Vec mean_weights(const FeatureBatch& batch, NormKind kind) {
  const int b_size = batch.size();
  if (kind == NormKind::BatchNorm) return Vec(b_size, 1.0 / b_size);

  PrototypeSet protos = compute_prototypes(batch);
  const double k_total = static_cast<double>(protos.num_prototypes());
  Vec w(b_size);
  for (int b = 0; b < b_size; ++b) {
    for (size_t k = 0; k < protos.ids.size(); ++k) {
      if (protos.ids[k] == batch.tags[b]) {
        w[b] = 1.0 / (k_total * protos.counts[k]);
        break;
      }
    }
  }
  return w;
}

namespace {

NormStats weighted_stats(const FeatureBatch& batch, const Vec& weights, double sigma_floor) {
  const int b_size = batch.size();
  const int dim = batch.dim();
  NormStats s;
  s.mu.assign(dim, 0.0);
  s.var.assign(dim, 0.0);
  s.sigma.assign(dim, 0.0);
  for (int b = 0; b < b_size; ++b) {
    const double* x = batch.features.row(b);
    for (int d = 0; d < dim; ++d) s.mu[d] += weights[b] * x[d];
  }
  for (int b = 0; b < b_size; ++b) {
    const double* x = batch.features.row(b);
    for (int d = 0; d < dim; ++d) {
      const double c = x[d] - s.mu[d];
      s.var[d] += c * c;
    }
  }
  for (int d = 0; d < dim; ++d) {
    s.var[d] /= b_size;  // biased, divide by B
    s.sigma[d] = std::max(std::sqrt(s.var[d]), sigma_floor);
  }
  return s;
}

}  // namespace

NormStats protonorm_stats(const FeatureBatch& batch, double sigma_floor) {
  return weighted_stats(batch, mean_weights(batch, NormKind::ProtoNorm), sigma_floor);
}

NormStats batchnorm_stats(const FeatureBatch& batch, double sigma_floor) {
  return weighted_stats(batch, mean_weights(batch, NormKind::BatchNorm), sigma_floor);
}

void update_running(RunningStats& running, const NormStats& stats) {
  if (!running.initialized()) {
    running.mu = stats.mu;
    running.var = stats.var;
  } else {
    const double m = running.track_momentum;
    for (size_t d = 0; d < running.mu.size(); ++d) {
      running.mu[d] = (1.0 - m) * running.mu[d] + m * stats.mu[d];
      running.var[d] = (1.0 - m) * running.var[d] + m * stats.var[d];
    }
  }
  running.batches_seen += 1;
}

Matrix standardize_forward(const FeatureBatch& batch, const NormStats& stats) {
  const int b_size = batch.size();
  const int dim = batch.dim();
  Matrix out(b_size, dim);
  for (int b = 0; b < b_size; ++b) {
    const double* x = batch.features.row(b);
    double* y = out.row(b);
    for (int d = 0; d < dim; ++d) y[d] = (x[d] - stats.mu[d]) / stats.sigma[d];
  }
  return out;
}

Matrix standardize_backward(const FeatureBatch& batch, const Matrix& upstream, NormKind kind,
                            double sigma_floor) {
  const int b_size = batch.size();
  const int dim = batch.dim();
  assert(upstream.rows() == b_size && upstream.cols() == dim);

  const Vec w = mean_weights(batch, kind);
  const NormStats stats = weighted_stats(batch, w, sigma_floor);
  const Matrix y = standardize_forward(batch, stats);

  Matrix grad(b_size, dim);
  for (int d = 0; d < dim; ++d) {
    const double sigma = stats.sigma[d];
    // When the floor is active sigma is locally constant in the inputs.
    const bool floored = std::sqrt(stats.var[d]) < sigma_floor;
    double g_sum = 0.0, gy_sum = 0.0, y_sum = 0.0;
    for (int b = 0; b < b_size; ++b) {
      g_sum += upstream(b, d);
      gy_sum += upstream(b, d) * y(b, d);
      y_sum += y(b, d);
    }
    for (int a = 0; a < b_size; ++a) {
      double g = upstream(a, d) - w[a] * g_sum;
      if (!floored) g -= (gy_sum / b_size) * (y(a, d) - w[a] * y_sum);
      grad(a, d) = g / sigma;
    }
  }
  return grad;
}

NormLayer::NormLayer(NormKind kind, double sigma_floor, double track_momentum, bool affine)
    : kind_(kind), sigma_floor_(sigma_floor), affine_(affine) {
  running_.track_momentum = track_momentum;
}

Matrix NormLayer::forward(const FeatureBatch& batch, Mode mode, NormStats* out_stats) {
  if (kind_ == NormKind::None) {
    if (out_stats) *out_stats = NormStats{Vec(batch.dim(), 0.0), Vec(batch.dim(), 1.0), Vec(batch.dim(), 1.0)};
    return batch.features;
  }
  NormStats stats;
  if (mode == Mode::Train) {
    stats = kind_ == NormKind::ProtoNorm ? protonorm_stats(batch, sigma_floor_)
                                         : batchnorm_stats(batch, sigma_floor_);
    update_running(running_, stats);
  } else {
    if (!running_.initialized())
      throw std::runtime_error("NormLayer: eval mode with uninitialized running stats");
    stats.mu = running_.mu;
    stats.var = running_.var;
    stats.sigma.resize(running_.var.size());
    for (size_t d = 0; d < running_.var.size(); ++d)
      stats.sigma[d] = std::max(std::sqrt(running_.var[d]), sigma_floor_);
  }
  Matrix out = standardize_forward(batch, stats);
  if (affine_) {
    if (gamma_.empty()) {
      gamma_.assign(batch.dim(), 1.0);
      beta_.assign(batch.dim(), 0.0);
    }
    for (int b = 0; b < out.rows(); ++b)
      for (int d = 0; d < out.cols(); ++d) out(b, d) = gamma_[d] * out(b, d) + beta_[d];
  }
  if (out_stats) *out_stats = stats;
  return out;
}

Matrix NormLayer::backward(const FeatureBatch& batch, const Matrix& upstream) const {
  if (kind_ == NormKind::None) return upstream;
  return standardize_backward(batch, upstream, kind_, sigma_floor_);
}

}  // namespace oim
