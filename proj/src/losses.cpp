#include "oim/losses.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace oim {

Vec oim_probability(const Vec& x_unit, const LookupTable& lut, const CircularQueue& queue,
                    double tau) {
  if (tau <= 0.0) throw std::invalid_argument("oim_probability: tau must be > 0");
  const int num_ids = lut.num_ids();
  const int fill = queue.fill_count();
  Vec logits(num_ids + fill);
  for (int l = 0; l < num_ids; ++l) {
    double s = 0.0;
    const double* v = lut.entries().row(l);
    for (int d = 0; d < lut.dim(); ++d) s += v[d] * x_unit[d];
    logits[l] = s / tau;
  }
  for (int q = 0; q < fill; ++q) {
    double s = 0.0;
    const double* u = queue.buffer().row(q);
    for (int d = 0; d < queue.dim(); ++d) s += u[d] * x_unit[d];
    logits[num_ids + q] = s / tau;
  }
  return softmax(logits);
}

LossOutput oim_loss(const std::vector<Proposal>& batch, const LookupTable& lut,
                    const CircularQueue& queue, const LossConfig& cfg) {
  const int b_size = static_cast<int>(batch.size());
  const int dim = lut.dim();
  int labelled = 0;
  for (const Proposal& p : batch)
    if (p.tag.labelled) ++labelled;
  if (labelled == 0) throw std::invalid_argument("oim_loss: batch has no labelled proposals");

  LossOutput out;
  out.grad_wrt_raw = Matrix(b_size, dim);
  out.per_sample_prob.assign(b_size, 0.0);

  const int num_ids = lut.num_ids();
  double total = 0.0;
  for (int b = 0; b < b_size; ++b) {
    const Proposal& p = batch[b];
    if (!p.tag.labelled) continue;
    if (p.tag.id < 0 || p.tag.id >= num_ids)
      throw std::out_of_range("oim_loss: labelled id outside LUT range");

    const Vec x_unit = l2_normalize(p.feature);
    const Vec probs = oim_probability(x_unit, lut, queue, cfg.tau);
    const double pi_t = probs[p.tag.id];
    out.per_sample_prob[b] = pi_t;
    total += -std::log(pi_t);

    // d(-log pi_t)/dz_i = pi_i - [i == t]; z_i = w_i.x/tau with bank rows w_i
    // held constant.
    Vec g_unit(dim, 0.0);
    for (int l = 0; l < num_ids; ++l) {
      const double coeff = (probs[l] - (l == p.tag.id ? 1.0 : 0.0)) / cfg.tau;
      const double* v = lut.entries().row(l);
      for (int d = 0; d < dim; ++d) g_unit[d] += coeff * v[d];
    }
    for (int q = 0; q < queue.fill_count(); ++q) {
      const double coeff = probs[num_ids + q] / cfg.tau;
      const double* u = queue.buffer().row(q);
      for (int d = 0; d < dim; ++d) g_unit[d] += coeff * u[d];
    }
    Vec g_raw = l2_normalize_backward(p.feature, g_unit);
    for (int d = 0; d < dim; ++d) out.grad_wrt_raw(b, d) = g_raw[d] / labelled;
  }
  out.value = total / labelled;
  return out;
}

LossOutput training_step(const std::vector<Proposal>& batch, LookupTable& lut,
                         CircularQueue& queue, const LossConfig& cfg) {
  if (cfg.mode == LossMode::LOIM) {
    for (const Proposal& p : batch)
      if (p.tag.labelled && !p.iou.has_value())
        throw std::invalid_argument("training_step: LOIM mode requires IoU on labelled proposals");
  }

  LossOutput out = oim_loss(batch, lut, queue, cfg);

  // Bank updates, in batch order, strictly after the loss.
  for (const Proposal& p : batch) {
    const Vec x_unit = l2_normalize(p.feature);
    if (p.tag.labelled) {
      if (cfg.mode == LossMode::OIM)
        lut.update_oim(p.tag.id, x_unit, cfg.eta);
      else
        lut.update_loim(p.tag.id, x_unit, *p.iou, cfg.epsilon);
    } else {
      queue.push(x_unit);
    }
  }
  return out;
}

}  // namespace oim
