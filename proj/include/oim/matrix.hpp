#ifndef OIM_MATRIX_HPP_
#define OIM_MATRIX_HPP_

#include <cstddef>
#include <vector>

namespace oim {

using Vec = std::vector<double>;

// Row-major dense matrix of doubles. Desk-scale sizes only (B <= 64, D <= 256),
// so everything is naive loops, no BLAS.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  Vec row_vec(int r) const { return Vec(row(r), row(r) + cols_); }
  void set_row(int r, const Vec& v);

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);

// v / max(||v||, eps). Zero vectors stay zero.
Vec l2_normalize(const Vec& v, double eps = 1e-12);

// Gradient of l2_normalize: (upstream - (v_hat . upstream) v_hat) / ||v||.
// Degenerate inputs (||v|| < eps) get a zero gradient.
Vec l2_normalize_backward(const Vec& v, const Vec& upstream, double eps = 1e-12);

// Max-subtracted stable softmax.
Vec softmax(const Vec& logits);

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);

}  // namespace oim

#endif  // OIM_MATRIX_HPP_
