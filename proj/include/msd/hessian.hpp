#pragma once

#include <optional>

#include "msd/problem.hpp"

namespace msd {

enum class HessianMode { Analytic, FiniteDifference };

/// grad f(x) = P(x)∇f(x).
[[nodiscard]] TangentVector riemannian_grad(const SaddleProblem& problem, const Point& x);

/**
 * Riemannian Hessian-vector products.
 *
 * Analytic mode evaluates P(∇²f v − Σλ_i∇²c_i v) with λ = (AᵀA)⁻¹Aᵀ∇f.
 * FiniteDifference mode takes central differences of the Riemannian gradient
 * along the retraction curve t ↦ Ret_x(tv), mapping the two gradients back
 * to T_x by orthogonal projection; the displacement is ε(1 + ‖x‖).
 */
class HessianOracle {
 public:
  HessianOracle(const SaddleProblem& problem, HessianMode mode, double epsilon = 1e-6);

  /// Analytic when the problem supplies ∇²f·v, else finite differences.
  static HessianOracle for_problem(const SaddleProblem& problem);

  [[nodiscard]] HessianMode mode() const noexcept { return mode_; }
  [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
  [[nodiscard]] const SaddleProblem& problem() const noexcept { return *problem_; }

  /// Hessian frozen at one point; reuses ∇f and multipliers across products.
  class Local {
   public:
    [[nodiscard]] Vector<> apply(const Vector<>& v) const;
    /// Columnwise apply.
    [[nodiscard]] Matrix<> apply(const Matrix<>& vs) const;
    /// BᵀHB for an orthonormal tangent frame B, symmetrized.
    [[nodiscard]] Matrix<> reduced(const Matrix<>& basis) const;

   private:
    friend class HessianOracle;
    Local(const HessianOracle& oracle, const Point& x);
    const HessianOracle* oracle_;
    Point x_;
    Vector<> grad_;         // euclidean gradient (analytic mode)
    Vector<> multipliers_;  // (analytic mode)
  };

  [[nodiscard]] Local at(const Point& x) const { return Local(*this, x); }

  /// Throws ZeroDirection if ‖v‖ < 1e−14.
  [[nodiscard]] TangentVector hess_vec(const Point& x, const TangentVector& v) const;

  /// Zero-extended ambient Hessian B(BᵀHB)Bᵀ.
  [[nodiscard]] Matrix<> ambient_matrix(const Point& x) const;

 private:
  const SaddleProblem* problem_;
  HessianMode mode_;
  double epsilon_;
};

struct EigenResult {
  Vector<> values;   // ascending, d − m entries
  Matrix<> vectors;  // d × k ambient, orthonormal, tangent
};

inline constexpr double kExactEigengap = 1e-10;

/// Dense eigensolve of the Hessian on a tangent frame; returns the full
/// spectrum and the k lowest eigenvectors. Throws EigengapCollapse when
/// λ_k and λ_{k+1} are closer than kExactEigengap.
[[nodiscard]] EigenResult exact_unstable_eigs(const HessianOracle& oracle, const Point& x, Index k);
/// Same, on a caller-supplied orthonormal tangent frame.
[[nodiscard]] EigenResult exact_unstable_eigs(const HessianOracle& oracle, const Point& x, Index k,
                                              const Matrix<>& basis);

struct IndexReport {
  int negative = 0;
  int near_zero = 0;
  int positive = 0;
  double zero_band = 0.0;
  double gradient_norm = 0.0;
  bool advisory = false;  // gradient above index_tol: not a critical point
  Vector<> values;
};

struct IndexOptions {
  double index_tol = 1e-6;
  /// Band half-width is zero_band_rel · (1 + L̂), L̂ = max |λ|.
  double zero_band_rel = 1e-8;
};

[[nodiscard]] IndexReport saddle_index(const HessianOracle& oracle, const Point& x, IndexOptions opts = {});

/// μ = min |λ|, L = max |λ| over eigenvalues outside the zero band.
[[nodiscard]] std::optional<SpectralBounds> spectral_bounds(const IndexReport& report);

}  // namespace msd
