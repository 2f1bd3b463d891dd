#include "oim/embedder.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace oim {

namespace {

constexpr double kLeakySlope = 0.01;

double activate(Nonlinearity f, double x) {
  switch (f) {
    case Nonlinearity::LeakyRelu:
      return x >= 0.0 ? x : kLeakySlope * x;
    case Nonlinearity::Tanh:
      return std::tanh(x);
    case Nonlinearity::Identity:
      return x;
  }
  return x;
}

double activate_grad(Nonlinearity f, double pre) {
  switch (f) {
    case Nonlinearity::LeakyRelu:
      return pre >= 0.0 ? 1.0 : kLeakySlope;
    case Nonlinearity::Tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
    case Nonlinearity::Identity:
      return 1.0;
  }
  return 1.0;
}

Matrix uniform_matrix(int rows, int cols, double a, Rng& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-a, a);
  return m;
}

}  // namespace

EmbedderParams init_params(const EmbedderConfig& cfg, Rng& rng) {
  EmbedderParams p;
  const double a1 = std::sqrt(1.0 / cfg.in_dim);
  const double a2 = std::sqrt(1.0 / cfg.hidden_dim);
  p.w1 = uniform_matrix(cfg.in_dim, cfg.hidden_dim, a1, rng);
  p.b1.resize(cfg.hidden_dim);
  for (double& b : p.b1) b = rng.uniform(-a1, a1);
  p.w2 = uniform_matrix(cfg.hidden_dim, cfg.out_dim, a2, rng);
  p.b2.resize(cfg.out_dim);
  for (double& b : p.b2) b = rng.uniform(-a2, a2);
  return p;
}

Matrix embed_forward(const EmbedderParams& params, const EmbedderConfig& cfg, const Matrix& input,
                     EmbedCache* cache) {
  if (input.cols() != cfg.in_dim) throw std::invalid_argument("embed_forward: input dim mismatch");
  Matrix pre1 = matmul(input, params.w1);
  for (int b = 0; b < pre1.rows(); ++b)
    for (int j = 0; j < pre1.cols(); ++j) pre1(b, j) += params.b1[j];

  Matrix hidden(pre1.rows(), pre1.cols());
  for (int b = 0; b < pre1.rows(); ++b)
    for (int j = 0; j < pre1.cols(); ++j) hidden(b, j) = activate(cfg.activation, pre1(b, j));

  Matrix out = matmul(hidden, params.w2);
  for (int b = 0; b < out.rows(); ++b)
    for (int j = 0; j < out.cols(); ++j) out(b, j) += params.b2[j];

  if (cache) {
    cache->input = input;
    cache->pre1 = pre1;
    cache->hidden = hidden;
  }
  return out;
}

EmbedGradients embed_backward(const EmbedderParams& params, const EmbedderConfig& cfg,
                              const EmbedCache& cache, const Matrix& grad_out) {
  EmbedGradients g;
  g.w2 = matmul_at(cache.hidden, grad_out);
  g.b2.assign(cfg.out_dim, 0.0);
  for (int b = 0; b < grad_out.rows(); ++b)
    for (int j = 0; j < grad_out.cols(); ++j) g.b2[j] += grad_out(b, j);

  Matrix grad_hidden = matmul_bt(grad_out, params.w2);
  for (int b = 0; b < grad_hidden.rows(); ++b)
    for (int j = 0; j < grad_hidden.cols(); ++j)
      grad_hidden(b, j) *= activate_grad(cfg.activation, cache.pre1(b, j));

  g.w1 = matmul_at(cache.input, grad_hidden);
  g.b1.assign(cfg.hidden_dim, 0.0);
  for (int b = 0; b < grad_hidden.rows(); ++b)
    for (int j = 0; j < grad_hidden.cols(); ++j) g.b1[j] += grad_hidden(b, j);

  g.input = matmul_bt(grad_hidden, params.w1);
  return g;
}

OptimState init_optim(const EmbedderParams& params, double momentum) {
  OptimState opt;
  opt.momentum = momentum;
  opt.velocity.w1 = Matrix(params.w1.rows(), params.w1.cols());
  opt.velocity.b1.assign(params.b1.size(), 0.0);
  opt.velocity.w2 = Matrix(params.w2.rows(), params.w2.cols());
  opt.velocity.b2.assign(params.b2.size(), 0.0);
  return opt;
}

namespace {

void sgd_apply(std::vector<double>& param, const std::vector<double>& grad,
               std::vector<double>& vel, double m, double lr) {
  assert(param.size() == grad.size() && param.size() == vel.size());
  for (size_t i = 0; i < param.size(); ++i) {
    vel[i] = m * vel[i] + grad[i];
    param[i] -= lr * vel[i];
  }
}

}  // namespace

void sgd_step(EmbedderParams& params, const EmbedGradients& grads, OptimState& opt, double lr) {
  sgd_apply(params.w1.data(), grads.w1.data(), opt.velocity.w1.data(), opt.momentum, lr);
  sgd_apply(params.b1, grads.b1, opt.velocity.b1, opt.momentum, lr);
  sgd_apply(params.w2.data(), grads.w2.data(), opt.velocity.w2.data(), opt.momentum, lr);
  sgd_apply(params.b2, grads.b2, opt.velocity.b2, opt.momentum, lr);
}

double lr_at(const Schedule& sched, long step, int epoch) {
  double lr = sched.base_lr;
  if (sched.warmup_steps > 0 && step < sched.warmup_steps)
    lr = sched.base_lr * static_cast<double>(step + 1) / sched.warmup_steps;
  if (epoch >= sched.decay_epoch) lr *= sched.decay_factor;
  return lr;
}

}  // namespace oim
