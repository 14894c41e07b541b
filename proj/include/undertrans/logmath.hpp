#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace undertrans {

template <typename Scalar = double>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

/// Natural log with log(0) mapped to the -inf sentinel.
template <typename Scalar>
Scalar safe_log(Scalar p) {
  return p > Scalar(0) ? std::log(p) : neg_inf<Scalar>();
}

template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return neg_inf<Scalar>();
  const Scalar hi = x.maxCoeff();
  if (hi == neg_inf<Scalar>()) return hi;
  return hi + std::log((x - hi).exp().sum());
}

template <typename Scalar>
Scalar logaddexp(Scalar a, Scalar b) {
  if (a == neg_inf<Scalar>()) return b;
  if (b == neg_inf<Scalar>()) return a;
  const Scalar hi = a > b ? a : b;
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace undertrans
