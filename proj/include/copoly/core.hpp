#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace copoly {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Vector = VectorX<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Thrown when a computation would exceed a configured work budget.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log(e^a + e^b), exact for -inf operands.
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log((1 + e^x) / 2) without overflow.
inline double log_half_one_plus_exp(double x) {
  constexpr double kLog2 = 0.69314718055994530942;
  if (x > 0) return x + std::log1p(std::exp(-x)) - kLog2;
  return std::log1p(std::exp(x)) - kLog2;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace copoly
