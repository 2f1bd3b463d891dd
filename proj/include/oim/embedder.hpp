#ifndef OIM_EMBEDDER_HPP_
#define OIM_EMBEDDER_HPP_

#include "oim/matrix.hpp"
#include "oim/rng.hpp"

namespace oim {

enum class Nonlinearity { LeakyRelu, Tanh, Identity };

struct EmbedderConfig {
  int in_dim = 2;
  int hidden_dim = 16;
  int out_dim = 2;  // D
  Nonlinearity activation = Nonlinearity::LeakyRelu;
};

// Two affine layers with an elementwise nonlinearity between.
struct EmbedderParams {
  Matrix w1;  // in_dim x hidden_dim
  Vec b1;
  Matrix w2;  // hidden_dim x out_dim
  Vec b2;
};

// Seeded uniform init in [-a, a], a = sqrt(1/fan_in).
EmbedderParams init_params(const EmbedderConfig& cfg, Rng& rng);

struct EmbedCache {
  Matrix input;   // B x in_dim
  Matrix pre1;    // B x hidden_dim, pre-activation
  Matrix hidden;  // B x hidden_dim, post-activation
};

Matrix embed_forward(const EmbedderParams& params, const EmbedderConfig& cfg, const Matrix& input,
                     EmbedCache* cache = nullptr);

struct EmbedGradients {
  Matrix w1;
  Vec b1;
  Matrix w2;
  Vec b2;
  Matrix input;
};

EmbedGradients embed_backward(const EmbedderParams& params, const EmbedderConfig& cfg,
                              const EmbedCache& cache, const Matrix& grad_out);

struct OptimState {
  EmbedderParams velocity;  // shapes mirror the parameters
  double momentum = 0.9;
};

OptimState init_optim(const EmbedderParams& params, double momentum = 0.9);

// velocity <- m*velocity + grad; param <- param - lr*velocity
void sgd_step(EmbedderParams& params, const EmbedGradients& grads, OptimState& opt, double lr);

struct Schedule {
  double base_lr = 0.003;
  int warmup_steps = 0;  // 0 = resolved to one epoch by the training harness
  int decay_epoch = 16;
  double decay_factor = 0.1;
  int total_epochs = 20;
};

// Linear ramp from base_lr/warmup_steps to base_lr over the warm-up, then
// base_lr, scaled by decay_factor from decay_epoch onward.
double lr_at(const Schedule& sched, long step, int epoch);

}  // namespace oim

#endif  // OIM_EMBEDDER_HPP_
