#ifndef OIM_BATCH_HPP_
#define OIM_BATCH_HPP_

#include <vector>

#include "oim/matrix.hpp"

namespace oim {

// A sample is either a labelled ID (0-based, < L) or an unlabelled instance
// identified by a per-batch unique key.
struct IdTag {
  bool labelled = false;
  int id = 0;  // label for labelled samples, instance key otherwise

  static IdTag label(int id) { return {true, id}; }
  static IdTag unlabelled(int key) { return {false, key}; }

  friend bool operator==(const IdTag& a, const IdTag& b) {
    return a.labelled == b.labelled && a.id == b.id;
  }
};

// B x D raw features plus per-row tags.
struct FeatureBatch {
  Matrix features;
  std::vector<IdTag> tags;

  int size() const { return features.rows(); }
  int dim() const { return features.cols(); }
};

}  // namespace oim

#endif  // OIM_BATCH_HPP_
