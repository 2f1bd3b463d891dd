#ifndef TESTS_GRADCHECK_UTIL_HPP_
#define TESTS_GRADCHECK_UTIL_HPP_

#include <cmath>
#include <functional>

// Test-side finite-difference oracle, independent of the analytic backward
// passes it checks.
namespace gradcheck {

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double a, double b) {
  const double denom = std::max(std::fabs(a), std::fabs(b));
  if (denom < 1e-8) return std::fabs(a - b);
  return std::fabs(a - b) / denom;
}

}  // namespace gradcheck

#endif  // TESTS_GRADCHECK_UTIL_HPP_
