#pragma once

#include <random>

#include <doctest.h>

#include "msd/geometry.hpp"

namespace msd::test {

inline Vector<> gaussian(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> dist;
  Vector<> v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

inline Matrix<> gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  return gaussian(rng, rows * cols).reshaped(rows, cols);
}

/// Random feasible point: project a Gaussian sample onto M by retracting from `seed_point`.
inline Point random_point(std::mt19937_64& rng, const Point& seed_point, double spread = 1.0) {
  const auto& m = *seed_point.manifold;
  Vector<> eta = m.project(seed_point.coords, gaussian(rng, m.ambient_dim()));
  eta *= spread / std::max(1e-300, m.norm(eta));
  return make_point(seed_point.manifold, m.retract(seed_point.coords, eta));
}

/// Random tangent vector of unit manifold norm at x.
inline TangentVector random_tangent(std::mt19937_64& rng, const Point& x) {
  const auto& m = *x.manifold;
  Vector<> v = m.project(x.coords, gaussian(rng, m.ambient_dim()));
  return {x, v / m.norm(v)};
}

/// Random symmetric matrix with unit-scale Gaussian entries.
inline Matrix<> random_symmetric(std::mt19937_64& rng, Index d) {
  const Matrix<> g = gaussian(rng, d, d);
  return (g + g.transpose()) / 2.0;
}

/// Q factor of a Gaussian matrix: a random orthonormal d × k frame.
inline Matrix<> random_frame(std::mt19937_64& rng, Index d, Index k) {
  Eigen::HouseholderQR<Matrix<>> qr(gaussian(rng, d, k));
  return qr.householderQ() * Matrix<>::Identity(d, k);
}

inline Vector<> vec(std::initializer_list<double> xs) {
  Vector<> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline void check_close(const Vector<>& a, const Vector<>& b, double tol) {
  REQUIRE(a.size() == b.size());
  CHECK((a - b).norm() <= tol);
}

}  // namespace msd::test
