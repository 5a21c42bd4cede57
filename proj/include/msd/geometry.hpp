#pragma once

#include <memory>
#include <string>
#include <vector>

#include "msd/core.hpp"

namespace msd {

enum class ManifoldKind { Euclidean, UnitSphere, ProductSphere, Cylinder, Stiefel, WeightedComplexSphere };

const char* to_string(ManifoldKind kind);

/**
 * An embedded manifold M = { x ∈ ℝ^d : c(x) = 0 } with m equality constraints.
 *
 * Implementations work on raw ambient coordinate vectors; the typed wrappers
 * (Point, TangentVector and the free functions below) add the base-point
 * bookkeeping. All members are const and thread-safe.
 *
 * The inner product on the ambient space is `metric_scale() · ⟨u, v⟩₂`. Only a
 * scalar multiple of the Euclidean product is supported, which keeps the
 * orthogonal tangent projection identical to the Euclidean one.
 */
class Manifold {
 public:
  Manifold(Index ambient_dim, Index constraint_count)
      : ambient_dim_(ambient_dim), constraint_count_(constraint_count) {}
  virtual ~Manifold() = default;

  [[nodiscard]] Index ambient_dim() const noexcept { return ambient_dim_; }
  [[nodiscard]] Index constraint_count() const noexcept { return constraint_count_; }
  [[nodiscard]] Index tangent_dim() const noexcept { return ambient_dim_ - constraint_count_; }

  [[nodiscard]] virtual ManifoldKind kind() const noexcept = 0;
  [[nodiscard]] virtual std::string describe() const = 0;

  /// c(x), length m.
  [[nodiscard]] virtual Vector<> constraints(const Vector<>& x) const = 0;
  /// A(x) = (∇c_1, …, ∇c_m), d × m.
  [[nodiscard]] virtual Matrix<> jacobian(const Vector<>& x) const = 0;

  /// Orthogonal projection onto T_x M. The default evaluates I − A(AᵀA)⁻¹Aᵀ.
  [[nodiscard]] virtual Vector<> project(const Vector<>& x, const Vector<>& w) const;
  [[nodiscard]] virtual Vector<> retract(const Vector<>& x, const Vector<>& eta) const = 0;
  /// Carries v ∈ T_x M to T_{retract(x, eta)} M.
  [[nodiscard]] virtual Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                           const Vector<>& v) const = 0;

  /// Σ_i λ_i ∇²c_i(x) v for given multipliers λ (length m).
  [[nodiscard]] virtual Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                          const Vector<>& multipliers) const = 0;

  [[nodiscard]] virtual double metric_scale() const noexcept { return 1.0; }
  [[nodiscard]] virtual double feas_tol() const noexcept { return 1e-10; }

  [[nodiscard]] double inner(const Vector<>& u, const Vector<>& v) const {
    return metric_scale() * u.dot(v);
  }
  [[nodiscard]] double norm(const Vector<>& v) const { return std::sqrt(inner(v, v)); }
  [[nodiscard]] double violation(const Vector<>& x) const;

  /// Lagrange multipliers (AᵀA)⁻¹Aᵀg of an ambient vector g.
  [[nodiscard]] Vector<> multipliers(const Vector<>& x, const Vector<>& g) const;

  /// Orthonormal d × (d − m) frame of T_x M from a full QR of A(x).
  [[nodiscard]] Matrix<> tangent_basis(const Vector<>& x) const;

 private:
  Index ambient_dim_;
  Index constraint_count_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// P = I − A(AᵀA)⁻¹Aᵀ applied to w; throws RankDeficientConstraints when AᵀA
/// has condition number above 1e12.
[[nodiscard]] Vector<> project_via_jacobian(const Matrix<>& a, const Vector<>& w);

struct Point {
  Vector<> coords;
  ManifoldPtr manifold;

  [[nodiscard]] Index dim() const noexcept { return coords.size(); }
  [[nodiscard]] double violation() const { return manifold->violation(coords); }
  [[nodiscard]] bool feasible() const { return violation() <= manifold->feas_tol(); }
};

/// Exact comparison: same manifold object and bitwise-equal coordinates.
[[nodiscard]] bool same_point(const Point& a, const Point& b);

struct TangentVector {
  Point base;
  Vector<> comps;

  [[nodiscard]] double norm() const { return base.manifold->norm(comps); }
  /// ‖A(base)ᵀ comps‖ relative to 1 + ‖comps‖.
  [[nodiscard]] double tangency_residual() const;
};

struct SpectralBounds {
  double mu;
  double L;

  SpectralBounds(double mu_, double L_);
  [[nodiscard]] double kappa() const noexcept { return L / mu; }
};

[[nodiscard]] Point make_point(ManifoldPtr manifold, Vector<> coords);
[[nodiscard]] TangentVector zero_tangent(const Point& x);

[[nodiscard]] TangentVector tangent_project(const Point& x, const Vector<>& w);
[[nodiscard]] Point retract(const Point& x, const TangentVector& eta);
[[nodiscard]] TangentVector transport(const Point& x, const TangentVector& eta, const TangentVector& v);
[[nodiscard]] Matrix<> tangent_basis(const Point& x);

// ---------------------------------------------------------------------------
// Concrete manifolds

class EuclideanSpace final : public Manifold {
 public:
  explicit EuclideanSpace(Index dim);

  [[nodiscard]] ManifoldKind kind() const noexcept override { return ManifoldKind::Euclidean; }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> project(const Vector<>& x, const Vector<>& w) const override;
  [[nodiscard]] Vector<> retract(const Vector<>& x, const Vector<>& eta) const override;
  [[nodiscard]] Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                   const Vector<>& v) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;
};

/// Sphere of a given Euclidean radius, c(x) = ‖x‖² − r². Retraction is the
/// exponential map and transport is parallel transport along the geodesic.
class UnitSphere : public Manifold {
 public:
  explicit UnitSphere(Index dim, double radius = 1.0);

  [[nodiscard]] ManifoldKind kind() const noexcept override { return ManifoldKind::UnitSphere; }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> project(const Vector<>& x, const Vector<>& w) const override;
  [[nodiscard]] Vector<> retract(const Vector<>& x, const Vector<>& eta) const override;
  [[nodiscard]] Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                   const Vector<>& v) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;

  [[nodiscard]] double radius() const noexcept { return radius_; }

 private:
  double radius_;
};

/// S^{circle_dim−1} × ℝ^{free_dim}: the first circle_dim coordinates satisfy
/// ‖·‖² = 1, the rest are unconstrained.
class Cylinder final : public Manifold {
 public:
  explicit Cylinder(Index free_dim = 1, Index circle_dim = 2);

  [[nodiscard]] ManifoldKind kind() const noexcept override { return ManifoldKind::Cylinder; }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> project(const Vector<>& x, const Vector<>& w) const override;
  [[nodiscard]] Vector<> retract(const Vector<>& x, const Vector<>& eta) const override;
  [[nodiscard]] Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                   const Vector<>& v) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;

 private:
  Index circle_dim_;
};

/// Product of unit spheres with some coordinates pinned.
///
/// A factor is either fully pinned (all coordinates fixed, e.g. a particle at
/// the north pole) or partially pinned to zero, in which case the free
/// coordinates form a lower-dimensional unit sphere. Pinned coordinates are
/// zero blocks of every tangent vector.
class ProductSphere final : public Manifold {
 public:
  struct Factor {
    Index dim = 3;
    std::vector<Index> pinned;        // local coordinate indices
    std::vector<double> pinned_value; // same length as pinned
  };

  explicit ProductSphere(std::vector<Factor> factors);

  [[nodiscard]] ManifoldKind kind() const noexcept override { return ManifoldKind::ProductSphere; }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> project(const Vector<>& x, const Vector<>& w) const override;
  [[nodiscard]] Vector<> retract(const Vector<>& x, const Vector<>& eta) const override;
  [[nodiscard]] Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                   const Vector<>& v) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;

  [[nodiscard]] const std::vector<Factor>& factors() const noexcept { return factors_; }

 private:
  struct Layout {
    Index offset;
    std::vector<Index> free;  // local indices
    Index constraint_offset;
    bool has_sphere;
  };
  std::vector<Factor> factors_;
  std::vector<Layout> layout_;

  template <typename Fn>
  void for_each_free_block(Fn&& fn) const;
};

/// St(n, p) = { X ∈ ℝ^{n×p} : XᵀX = I }, stored column-major in a vector of
/// length n·p. Constraints are the upper triangle of XᵀX − I. Retraction is
/// the Q-factor of the thin QR of X + η (positive diagonal R); transport is
/// the projection ζ − Y sym(Yᵀζ) onto the destination tangent space.
class Stiefel final : public Manifold {
 public:
  Stiefel(Index n, Index p);

  [[nodiscard]] ManifoldKind kind() const noexcept override { return ManifoldKind::Stiefel; }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> project(const Vector<>& x, const Vector<>& w) const override;
  [[nodiscard]] Vector<> retract(const Vector<>& x, const Vector<>& eta) const override;
  [[nodiscard]] Vector<> transport(const Vector<>& x, const Vector<>& eta,
                                   const Vector<>& v) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;

  [[nodiscard]] Index n() const noexcept { return n_; }
  [[nodiscard]] Index p() const noexcept { return p_; }

  [[nodiscard]] Eigen::Map<const Matrix<>> as_matrix(const Vector<>& x) const {
    return {x.data(), n_, p_};
  }

 private:
  Index n_;
  Index p_;
};

/// Square grid with homogeneous Dirichlet boundary; unknowns are interior nodes.
struct GridSpec {
  Index nodes = 64;          // per dimension, boundary included
  double half_width = 8.0;   // domain [−M, M]²

  [[nodiscard]] Index interior() const noexcept { return nodes - 2; }
  [[nodiscard]] Index unknowns() const noexcept { return interior() * interior(); }
  [[nodiscard]] double spacing() const noexcept { return 2.0 * half_width / double(nodes - 1); }
  /// Coordinate of interior index i ∈ [0, interior()).
  [[nodiscard]] double coord(Index i) const noexcept { return -half_width + double(i + 1) * spacing(); }
};

/// Complex field on the interior grid (interleaved re/im) with the weighted
/// normalization h²Σ|φ|² = 1. The metric is h²·⟨·,·⟩₂, so this is the
/// Euclidean sphere of radius 1/h with the exponential map taken in the
/// weighted norm.
class WeightedComplexSphere final : public UnitSphere {
 public:
  explicit WeightedComplexSphere(GridSpec grid);

  [[nodiscard]] ManifoldKind kind() const noexcept override {
    return ManifoldKind::WeightedComplexSphere;
  }
  [[nodiscard]] std::string describe() const override;
  [[nodiscard]] double metric_scale() const noexcept override { return weight_; }
  [[nodiscard]] double feas_tol() const noexcept override { return 1e-8; }
  /// c(φ) = h²‖φ‖² − 1 (the weighted normalization, not the radius form).
  [[nodiscard]] Vector<> constraints(const Vector<>& x) const override;
  [[nodiscard]] Matrix<> jacobian(const Vector<>& x) const override;
  [[nodiscard]] Vector<> constraint_hessian_apply(const Vector<>& x, const Vector<>& v,
                                                  const Vector<>& multipliers) const override;

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }

 private:
  GridSpec grid_;
  double weight_;
};

}  // namespace msd
