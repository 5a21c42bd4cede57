#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "msd/core.hpp"
#include "msd/geometry.hpp"

namespace msd {

/// w − 2V(Vᵀw), i.e. (I − 2VVᵀ)w for orthonormal columns V.
template <typename DerivedV, typename DerivedW>
[[nodiscard]] auto reflect(const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedW::Scalar;
  Matrix<Scalar> out = w;
  if (v.cols() > 0) out.noalias() -= Scalar(2) * (v * (v.transpose() * w));
  return out;
}

/// ‖V₁V₁ᵀ − V₂V₂ᵀ‖_F for orthonormal frames of equal width, evaluated as
/// √2‖V₁ − V₂(V₂ᵀV₁)‖_F to keep full precision near zero.
template <typename Derived1, typename Derived2>
[[nodiscard]] typename Derived1::Scalar projector_distance(const Eigen::MatrixBase<Derived1>& v1,
                                                           const Eigen::MatrixBase<Derived2>& v2) {
  using Scalar = typename Derived1::Scalar;
  if (v1.cols() != v2.cols()) throw Error(ErrorKind::InvalidArgument, "projector_distance: frame widths differ");
  const Matrix<Scalar> residual = v1 - v2 * (v2.transpose() * v1);
  return std::sqrt(Scalar(2)) * residual.norm();
}

/// Householder reflector R = I − 2VVᵀ, V a d × k orthonormal frame of
/// tangent vectors at `base`. Only V is stored; the ambient d × d operator is
/// formed on demand by `as_operator`.
struct Reflector {
  Point base;
  Matrix<> frame;

  [[nodiscard]] Index k() const noexcept { return frame.cols(); }
  /// max(‖VᵀV − I‖_max, tangency residual of every column).
  [[nodiscard]] double invariant_residual() const;
};

/// Validates orthonormality and tangency (tolerance `tol`).
[[nodiscard]] Reflector make_reflector(Point base, Matrix<> frame, double tol = 1e-10);

/// Symmetric operator in ambient coordinates attached to a base point.
/// Reflector-like operators act as the identity on the normal space;
/// Hessians are zero-extended there.
struct SymOperator {
  Point base;
  Matrix<> mat;
};

[[nodiscard]] SymOperator as_operator(const Reflector& r);

/// (I − 2VVᵀ)w. Throws BaseMismatch if w is not based at r.base.
[[nodiscard]] TangentVector apply_reflection(const Reflector& r, const TangentVector& w);

/// R̄ = R + dt (H − R H R). `lipschitz`, when given, is an estimate of L and
/// triggers a warning (appended to `warnings`) if dt ≥ 1/(2L).
[[nodiscard]] SymOperator euler_reflector_step(const Reflector& r, const SymOperator& h, double dt,
                                               std::optional<double> lipschitz = std::nullopt,
                                               std::vector<std::string>* warnings = nullptr);

inline constexpr double kOrthEigengap = 1e-8;

/// Nearest point of R_k to R̄ in the Frobenius norm: eigenvectors of the k
/// smallest eigenvalues become the −1 eigenspace. Throws EigengapCollapse if
/// the k-th and (k+1)-th eigenvalues are closer than kOrthEigengap.
[[nodiscard]] Reflector orth(const SymOperator& rbar, Index k);

/// Transports each column of V along eta to x_new, re-projects onto T_{x_new}
/// and re-orthonormalizes with modified Gram–Schmidt. Throws
/// TransportDegeneracy if the transported Gram matrix has condition > 1e8.
[[nodiscard]] Reflector transport_reflector(const Reflector& r, const Point& x_new, const TangentVector& eta);

// ---------------------------------------------------------------------------
// Low-rank form of orth(euler_reflector_step(R, H, dt), k).
//
// With R = I − 2VVᵀ and W = HV, the correction H − RHR is
// 2(VWᵀ + WVᵀ) − 4V(VᵀW)Vᵀ, which lives in span[V, W]. Writing
// W = VG + UC with U an orthonormal basis of the part of W orthogonal to V,
// R̄ − I = [V U] S [V U]ᵀ with S = [[−2I, 2dt Cᵀ], [2dt C, 0]], and R̄ acts as
// the identity on the complement. Only H·V is needed.

template <typename Scalar>
struct LowRankOrth {
  Matrix<Scalar> frame;  // d × k
  Scalar eigengap;       // λ_{k+1}(R̄) − λ_k(R̄)
};

template <typename DerivedV, typename DerivedW>
[[nodiscard]] LowRankOrth<typename DerivedV::Scalar> lowrank_euler_orth(
    const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedW>& hv,
    typename DerivedV::Scalar dt) {
  using Scalar = typename DerivedV::Scalar;
  const Index d = v.rows();
  const Index k = v.cols();
  if (k == 0) return {Matrix<Scalar>(d, 0), std::numeric_limits<Scalar>::infinity()};

  const Matrix<Scalar> g = v.transpose() * hv;
  Matrix<Scalar> wperp = hv - v * g;
  wperp -= v * (v.transpose() * wperp);

  // Orthonormal basis U of range(wperp), discarding directions below rounding.
  Eigen::JacobiSVD<Matrix<Scalar>> svd(wperp, Eigen::ComputeThinU);
  const Scalar cutoff = Scalar(1e-12) * std::max(Scalar(1), hv.norm());
  Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cutoff) ++rank;
  Matrix<Scalar> u = svd.matrixU().leftCols(rank);
  u -= v * (v.transpose() * u);
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < j; ++i) u.col(j) -= u.col(i).dot(u.col(j)) * u.col(i);
    u.col(j).normalize();
  }
  const Matrix<Scalar> c = u.transpose() * wperp;

  const Index r = k + rank;
  Matrix<Scalar> s = Matrix<Scalar>::Zero(r, r);
  s.topLeftCorner(k, k).diagonal().setConstant(Scalar(-2));
  s.bottomLeftCorner(rank, k) = Scalar(2) * dt * c;
  s.topRightCorner(k, rank) = Scalar(2) * dt * c.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(s);
  const auto& lam = es.eigenvalues();
  Scalar next = std::numeric_limits<Scalar>::infinity();
  if (r > k) next = lam(k);
  if (d > r) next = std::min(next, Scalar(0));  // complement: eigenvalue 1 of R̄, i.e. 0 of S
  const Scalar gap = next - lam(k - 1);
  if (!(gap > Scalar(kOrthEigengap))) {
    throw Error(ErrorKind::EigengapCollapse, "reflector update lost the eigengap; reduce dt");
  }

  Matrix<Scalar> basis(d, r);
  basis << v, u;
  return {basis * es.eigenvectors().leftCols(k), gap};
}

}  // namespace msd
