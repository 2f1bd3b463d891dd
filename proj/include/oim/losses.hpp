#ifndef OIM_LOSSES_HPP_
#define OIM_LOSSES_HPP_

#include <vector>

#include "oim/matrix.hpp"
#include "oim/memory_bank.hpp"

namespace oim {

enum class LossMode { OIM, LOIM };

struct LossConfig {
  double tau = 0.33;
  double eta = 0.5;       // fixed momentum, OIM mode
  double epsilon = 0.1;   // clip bound, LOIM mode
  LossMode mode = LossMode::OIM;
};

struct LossOutput {
  double value = 0.0;            // mean -log pi_t over labelled samples
  Matrix grad_wrt_raw;           // B x D, w.r.t. pre-normalization features
  Vec per_sample_prob;           // pi_t per row; 0 for unlabelled rows
};

// Eq.-3 probabilities for a unit feature: softmax over the L LUT logits
// followed by the filled queue logits, all divided by tau.
Vec oim_probability(const Vec& x_unit, const LookupTable& lut, const CircularQueue& queue,
                    double tau);

// Mean -log pi_t over labelled proposals. Features are raw; the loss applies
// l2_normalize internally and chains gradients through it. LUT and queue
// entries are treated as constants.
LossOutput oim_loss(const std::vector<Proposal>& batch, const LookupTable& lut,
                    const CircularQueue& queue, const LossConfig& cfg);

// Loss against the current banks, then the bank updates: LUT rows by fixed
// (OIM) or IoU-adaptive (LOIM) momentum with the normalized features, and the
// queue gets each unlabelled proposal's normalized feature. Loss computation
// strictly precedes bank mutation.
LossOutput training_step(const std::vector<Proposal>& batch, LookupTable& lut,
                         CircularQueue& queue, const LossConfig& cfg);

}  // namespace oim

#endif  // OIM_LOSSES_HPP_
