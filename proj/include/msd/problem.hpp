#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "msd/geometry.hpp"

namespace msd {

struct InitialCondition {
  Point x0;
  std::optional<Matrix<>> frame;  // optional V0
};

/**
 * Objective plus geometry. `euclid_grad` is the gradient of `energy` with
 * respect to the manifold's ambient inner product (for the grid problems
 * that is the L² gradient, not the raw coordinate gradient).
 */
struct SaddleProblem {
  std::string name;
  ManifoldPtr manifold;
  std::function<double(const Vector<>&)> energy;
  std::function<Vector<>(const Vector<>&)> euclid_grad;
  /// ∇²f(x)·v in the same convention as euclid_grad; empty when unavailable.
  std::function<Vector<>(const Vector<>&, const Vector<>&)> euclid_hess_vec;
  std::optional<Vector<>> known_saddle;
  /// Distance to the known saddle (geodesic, or principal angles for subspaces).
  std::function<double(const Vector<>&)> error_to_known;
  int target_index = 1;
  double default_grad_tol = 1e-8;
  /// Builds a starting point from a descriptor ("near-saddle", ...).
  std::function<InitialCondition(const std::string&, std::uint64_t)> initializer;
  std::string default_init = "near-saddle";
  /// Parameters used to build the instance, for run metadata.
  std::map<std::string, std::string> parameters;

  [[nodiscard]] bool has_analytic_hessian() const { return static_cast<bool>(euclid_hess_vec); }
  [[nodiscard]] Point point(Vector<> coords) const { return make_point(manifold, std::move(coords)); }
};

}  // namespace msd
