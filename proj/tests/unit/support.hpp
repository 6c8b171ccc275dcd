#pragma once

#include <cmath>

#include "krrdd/numerics.hpp"
#include "krrdd/rng.hpp"

namespace krrdd::testing {

inline Matrix random_points(Index n, Index d, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Matrix x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) x(i, k) = scale * rng.normal();
  }
  return x;
}

inline Vector random_vector(Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline double rel_err(const Eigen::Ref<const Matrix>& got, const Eigen::Ref<const Matrix>& want) {
  const double denom = want.norm();
  return denom > 0.0 ? (got - want).norm() / denom : got.norm();
}

}  // namespace krrdd::testing
