#include "msd/reflector.hpp"

#include <sstream>

namespace msd {

double Reflector::invariant_residual() const {
  const Index k = frame.cols();
  double res = 0.0;
  if (k > 0) res = (frame.transpose() * frame - Matrix<>::Identity(k, k)).cwiseAbs().maxCoeff();
  for (Index j = 0; j < k; ++j) {
    res = std::max(res, TangentVector{base, frame.col(j)}.tangency_residual());
  }
  return res;
}

Reflector make_reflector(Point base, Matrix<> frame, double tol) {
  if (frame.rows() != base.dim()) {
    throw Error(ErrorKind::InvalidArgument, "reflector frame has wrong ambient dimension");
  }
  if (frame.cols() >= base.manifold->tangent_dim() && frame.cols() > 0) {
    throw Error(ErrorKind::InvalidArgument, "saddle index must be below the tangent dimension");
  }
  Reflector r{std::move(base), std::move(frame)};
  if (const double res = r.invariant_residual(); res > tol) {
    std::ostringstream os;
    os << "frame is not an orthonormal tangent frame (residual " << res << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  return r;
}

SymOperator as_operator(const Reflector& r) {
  const Index d = r.base.dim();
  Matrix<> mat = Matrix<>::Identity(d, d);
  mat.noalias() -= 2.0 * r.frame * r.frame.transpose();
  return {r.base, std::move(mat)};
}

TangentVector apply_reflection(const Reflector& r, const TangentVector& w) {
  if (!same_point(r.base, w.base)) throw Error(ErrorKind::BaseMismatch, "vector and reflector bases differ");
  return {w.base, reflect(r.frame, w.comps)};
}

SymOperator euler_reflector_step(const Reflector& r, const SymOperator& h, double dt,
                                 std::optional<double> lipschitz, std::vector<std::string>* warnings) {
  if (!same_point(r.base, h.base)) throw Error(ErrorKind::BaseMismatch, "operator and reflector bases differ");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (lipschitz && warnings && dt >= 0.5 / *lipschitz) {
    std::ostringstream os;
    os << "dt = " << dt << " >= 1/(2L) = " << 0.5 / *lipschitz
       << "; the one-step reflector update may not contract";
    warnings->push_back(os.str());
  }
  const Matrix<> rm = as_operator(r).mat;
  const Matrix<> hs = sym(h.mat);
  Matrix<> rbar = rm + dt * (hs - rm * hs * rm);
  // rm·hs·rm is symmetric up to rounding; restore exact symmetry.
  rbar = sym(rbar);
  return {r.base, std::move(rbar)};
}

Reflector orth(const SymOperator& rbar, Index k) {
  const Index d = rbar.mat.rows();
  if (k < 0 || k >= d) throw Error(ErrorKind::InvalidArgument, "orth: k out of range");
  if (k == 0) return {rbar.base, Matrix<>(d, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix<>> es(sym(rbar.mat));
  const double gap = es.eigenvalues()(k) - es.eigenvalues()(k - 1);
  if (!(gap > kOrthEigengap)) {
    std::ostringstream os;
    os << "eigenvalues " << k << " and " << k + 1 << " of R̄ differ by " << gap;
    throw Error(ErrorKind::EigengapCollapse, os.str());
  }
  return {rbar.base, es.eigenvectors().leftCols(k)};
}

Reflector transport_reflector(const Reflector& r, const Point& x_new, const TangentVector& eta) {
  if (!same_point(r.base, eta.base)) throw Error(ErrorKind::BaseMismatch, "eta is not based at the reflector base");
  if (eta.comps.isZero(0.0) && same_point(r.base, x_new)) return r;
  const auto& m = *r.base.manifold;
  const Index k = r.k();
  Matrix<> w(r.base.dim(), k);
  for (Index j = 0; j < k; ++j) {
    w.col(j) = m.project(x_new.coords, m.transport(r.base.coords, eta.comps, r.frame.col(j)));
  }
  if (k > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix<>> es(w.transpose() * w, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e8) {
      throw Error(ErrorKind::TransportDegeneracy, "transported reflector columns are nearly dependent");
    }
  }
  // Modified Gram–Schmidt, two passes.
  for (int pass = 0; pass < 2; ++pass) {
    for (Index j = 0; j < k; ++j) {
      for (Index i = 0; i < j; ++i) w.col(j) -= w.col(i).dot(w.col(j)) * w.col(i);
      w.col(j).normalize();
    }
  }
  return {x_new, std::move(w)};
}

}  // namespace msd
