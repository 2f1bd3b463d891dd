#ifndef OIM_NORMALIZATION_HPP_
#define OIM_NORMALIZATION_HPP_

#include <vector>

#include "oim/batch.hpp"
#include "oim/matrix.hpp"

namespace oim {

enum class NormKind { None, BatchNorm, ProtoNorm };
enum class Mode { Train, Eval };

// One prototype per distinct tag in the batch; row k is the channel-wise mean
// of the samples carrying tag k. Unlabelled instances are singleton prototypes.
struct PrototypeSet {
  Matrix prototypes;  // K x D
  std::vector<IdTag> ids;
  std::vector<int> counts;

  int num_prototypes() const { return prototypes.rows(); }
};

struct NormStats {
  Vec mu;     // length D
  Vec var;    // biased (divide by B) variance, before flooring
  Vec sigma;  // max(sqrt(var), sigma_floor)
};

struct RunningStats {
  Vec mu;
  Vec var;
  double track_momentum = 0.1;
  long batches_seen = 0;

  bool initialized() const { return batches_seen > 0; }
};

PrototypeSet compute_prototypes(const FeatureBatch& batch);

// Per-sample weight of each row in the mean: 1/(K*count(tag)) for ProtoNorm,
// 1/B for BatchNorm. Weights sum to 1.
Vec mean_weights(const FeatureBatch& batch, NormKind kind);

// mu = mean of prototypes (equivalently the 1/(K*count) weighted sample mean);
// sigma over all B raw rows around that mu.
NormStats protonorm_stats(const FeatureBatch& batch, double sigma_floor = 1e-5);

// Plain per-channel mean/variance over the B rows.
NormStats batchnorm_stats(const FeatureBatch& batch, double sigma_floor = 1e-5);

// EMA tracking: running <- (1-m)*running + m*batch; first call copies.
void update_running(RunningStats& running, const NormStats& stats);

// Standardizer applied before L2 normalization. kind None is a pass-through.
// No learnable affine in the projection-module configuration; the affine path
// exists behind a flag for the backbone variant and defaults off.
class NormLayer {
 public:
  explicit NormLayer(NormKind kind, double sigma_floor = 1e-5, double track_momentum = 0.1,
                     bool affine = false);

  NormKind kind() const { return kind_; }
  const RunningStats& running() const { return running_; }
  RunningStats& running() { return running_; }

  // Train mode standardizes with batch statistics and updates running stats.
  // Eval mode uses the tracked running statistics; throws if uninitialized.
  Matrix forward(const FeatureBatch& batch, Mode mode, NormStats* out_stats = nullptr);

  // Exact gradient of the Train-mode forward, including the dependence of mu
  // (through the per-tag weights) and sigma on every input row.
  Matrix backward(const FeatureBatch& batch, const Matrix& upstream) const;

 private:
  NormKind kind_;
  double sigma_floor_;
  bool affine_;
  Vec gamma_, beta_;
  RunningStats running_;
};

// Standalone train-mode forward/backward used by NormLayer and the tests.
Matrix standardize_forward(const FeatureBatch& batch, const NormStats& stats);
Matrix standardize_backward(const FeatureBatch& batch, const Matrix& upstream, NormKind kind,
                            double sigma_floor = 1e-5);

}  // namespace oim

#endif  // OIM_NORMALIZATION_HPP_
