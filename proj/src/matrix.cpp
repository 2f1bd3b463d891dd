#include "oim/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace oim {

void Matrix::set_row(int r, const Vec& v) {
  assert(static_cast<int>(v.size()) == cols_);
  std::copy(v.begin(), v.end(), row(r));
}

bool Matrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec l2_normalize(const Vec& v, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("l2_normalize: eps must be > 0");
  const double n = std::max(norm2(v), eps);
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Vec l2_normalize_backward(const Vec& v, const Vec& upstream, double eps) {
  assert(v.size() == upstream.size());
  const double n = norm2(v);
  if (n < eps) return Vec(v.size(), 0.0);  // degenerate: zero gradient
  Vec vhat(v.size());
  for (size_t i = 0; i < v.size(); ++i) vhat[i] = v[i] / n;
  const double proj = dot(vhat, upstream);
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = (upstream[i] - proj * vhat[i]) / n;
  return out;
}

Vec softmax(const Vec& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec out(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows());
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k)
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.cols());
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

}  // namespace oim
