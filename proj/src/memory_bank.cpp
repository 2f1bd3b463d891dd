#include "oim/memory_bank.hpp"

#include <cassert>
#include <stdexcept>

namespace oim {

double adaptive_momentum(double s, double epsilon) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("adaptive_momentum: epsilon must be in (0,1)");
  double c = s;
  if (c < 0.0) c = 0.0;
  if (c > 1.0 - epsilon) c = 1.0 - epsilon;
  return c;
}

LookupTable::LookupTable(int num_ids, int dim) : entries_(num_ids, dim) {}

void LookupTable::blend(int id, const Vec& x, double c) {
  if (id < 0 || id >= num_ids()) throw std::out_of_range("LookupTable: id out of range");
  assert(static_cast<int>(x.size()) == dim());
  Vec v = entries_.row_vec(id);
  const double retain = 1.0 - c;
  for (int d = 0; d < dim(); ++d) v[d] = retain * v[d] + c * x[d];
  if (norm2(v) > 0.0) v = l2_normalize(v);
  entries_.set_row(id, v);
  ++step_;
  if (logging_) log_.push_back({id, c, step_});
}

void LookupTable::update_oim(int id, const Vec& x, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("update_oim: eta must be in [0,1]");
  blend(id, x, 1.0 - eta);
}

void LookupTable::update_loim(int id, const Vec& x, double s, double epsilon) {
  blend(id, x, adaptive_momentum(s, epsilon));
}

CircularQueue::CircularQueue(int capacity, int dim) : buffer_(capacity, dim) {}

void CircularQueue::push(const Vec& x) {
  assert(static_cast<int>(x.size()) == dim());
  buffer_.set_row(cursor_, x);
  cursor_ = (cursor_ + 1) % capacity();
  if (fill_ < capacity()) ++fill_;
}

Matrix CircularQueue::active_negatives() const {
  Matrix out(fill_, dim());
  for (int q = 0; q < fill_; ++q) out.set_row(q, buffer_.row_vec(q));
  return out;
}

}  // namespace oim
