#ifndef OIM_MEMORY_BANK_HPP_
#define OIM_MEMORY_BANK_HPP_

#include <optional>
#include <vector>

#include "oim/batch.hpp"
#include "oim/matrix.hpp"

namespace oim {

// Eq.-8 clip: c = min(max(s, 0), 1 - epsilon).
double adaptive_momentum(double s, double epsilon);

struct LutUpdateRecord {
  int id;
  double momentum;  // blend weight on the incoming feature
  long step;
};

// L x D memory of per-ID features, zero-initialized. Nonzero rows are kept
// unit-norm by re-normalizing after every update; zero rows are exempt
// (normalizing zero is undefined) and still contribute exp(0/tau) to the
// probability denominator.
class LookupTable {
 public:
  LookupTable(int num_ids, int dim);

  int num_ids() const { return entries_.rows(); }
  int dim() const { return entries_.cols(); }
  const Matrix& entries() const { return entries_; }
  Vec entry(int id) const { return entries_.row_vec(id); }

  // v_t <- l2_normalize(eta*v_t + (1-eta)*x)
  void update_oim(int id, const Vec& x, double eta);
  // v_t <- l2_normalize((1-c)*v_t + c*x), c = adaptive_momentum(s, epsilon)
  void update_loim(int id, const Vec& x, double s, double epsilon);

  void enable_logging(bool on) { logging_ = on; }
  const std::vector<LutUpdateRecord>& update_log() const { return log_; }
  long steps_taken() const { return step_; }

 private:
  void blend(int id, const Vec& x, double c);

  Matrix entries_;
  bool logging_ = false;
  std::vector<LutUpdateRecord> log_;
  long step_ = 0;
};

// Q x D ring buffer of unlabelled-ID features.
class CircularQueue {
 public:
  CircularQueue(int capacity, int dim);

  int capacity() const { return buffer_.rows(); }
  int dim() const { return buffer_.cols(); }
  int fill_count() const { return fill_; }
  int write_cursor() const { return cursor_; }
  const Matrix& buffer() const { return buffer_; }

  void push(const Vec& x);

  // Only the filled rows, in buffer storage order.
  Matrix active_negatives() const;

 private:
  Matrix buffer_;
  int cursor_ = 0;
  int fill_ = 0;
};

// The feature/tag/IoU triple consumed by the loss and the LUT update.
// At the loss entry point the feature is raw (pre-L2-normalization); the loss
// owns the hypersphere projection.
struct Proposal {
  Vec feature;
  IdTag tag;
  std::optional<double> iou;  // s_x in [0,1]; required in LOIM mode for labelled rows
};

}  // namespace oim

#endif  // OIM_MEMORY_BANK_HPP_
