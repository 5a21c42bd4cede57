#include "msd/hessian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace msd {

TangentVector riemannian_grad(const SaddleProblem& problem, const Point& x) {
  return tangent_project(x, problem.euclid_grad(x.coords));
}

HessianOracle::HessianOracle(const SaddleProblem& problem, HessianMode mode, double epsilon)
    : problem_(&problem), mode_(mode), epsilon_(epsilon) {
  if (mode == HessianMode::Analytic && !problem.has_analytic_hessian()) {
    throw Error(ErrorKind::InvalidArgument, "problem '" + problem.name + "' has no analytic Hessian");
  }
  if (mode == HessianMode::FiniteDifference && !(epsilon >= 1e-8 && epsilon <= 1e-4)) {
    throw Error(ErrorKind::InvalidArgument, "finite-difference epsilon must lie in [1e-8, 1e-4]");
  }
}

HessianOracle HessianOracle::for_problem(const SaddleProblem& problem) {
  return {problem, problem.has_analytic_hessian() ? HessianMode::Analytic : HessianMode::FiniteDifference};
}

HessianOracle::Local::Local(const HessianOracle& oracle, const Point& x) : oracle_(&oracle), x_(x) {
  if (oracle.mode_ == HessianMode::Analytic) {
    grad_ = oracle.problem_->euclid_grad(x.coords);
    multipliers_ = x.manifold->multipliers(x.coords, grad_);
  }
}

Vector<> HessianOracle::Local::apply(const Vector<>& v) const {
  const auto& m = *x_.manifold;
  const auto& problem = *oracle_->problem_;
  if (v.isZero(0.0)) return Vector<>::Zero(v.size());
  if (oracle_->mode_ == HessianMode::Analytic) {
    Vector<> w = problem.euclid_hess_vec(x_.coords, v);
    if (m.constraint_count() > 0) w -= m.constraint_hessian_apply(x_.coords, v, multipliers_);
    return m.project(x_.coords, w);
  }
  const double vn = m.norm(v);
  if (vn < 1e-14) throw Error(ErrorKind::ZeroDirection, "Hessian direction is numerically zero");
  const double h = oracle_->epsilon_ * (1.0 + m.norm(x_.coords)) / vn;
  const Vector<> yp = m.retract(x_.coords, h * v);
  const Vector<> ym = m.retract(x_.coords, -h * v);
  const Vector<> gp = m.project(yp, problem.euclid_grad(yp));
  const Vector<> gm = m.project(ym, problem.euclid_grad(ym));
  return m.project(x_.coords, (gp - gm) / (2.0 * h));
}

Matrix<> HessianOracle::Local::apply(const Matrix<>& vs) const {
  Matrix<> out(vs.rows(), vs.cols());
  for (Index j = 0; j < vs.cols(); ++j) out.col(j) = apply(Vector<>(vs.col(j)));
  return out;
}

Matrix<> HessianOracle::Local::reduced(const Matrix<>& basis) const {
  return sym(basis.transpose() * apply(basis));
}

TangentVector HessianOracle::hess_vec(const Point& x, const TangentVector& v) const {
  if (!same_point(x, v.base)) throw Error(ErrorKind::BaseMismatch, "hess_vec: v is not based at x");
  if (!v.comps.isZero(0.0) && v.comps.norm() < 1e-14) {
    throw Error(ErrorKind::ZeroDirection, "Hessian direction is numerically zero");
  }
  return {x, at(x).apply(v.comps)};
}

Matrix<> HessianOracle::ambient_matrix(const Point& x) const {
  const Matrix<> b = tangent_basis(x);
  return b * at(x).reduced(b) * b.transpose();
}

EigenResult exact_unstable_eigs(const HessianOracle& oracle, const Point& x, Index k) {
  return exact_unstable_eigs(oracle, x, k, tangent_basis(x));
}

EigenResult exact_unstable_eigs(const HessianOracle& oracle, const Point& x, Index k, const Matrix<>& basis) {
  const Index t = basis.cols();
  if (k < 0 || k > t - 1) {
    std::ostringstream os;
    os << "saddle index " << k << " must be at most tangent dimension - 1 = " << t - 1;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix<>> es(oracle.at(x).reduced(basis));
  const Vector<>& values = es.eigenvalues();
  if (k > 0 && !(values(k) - values(k - 1) >= kExactEigengap)) {
    std::ostringstream os;
    os << "Hessian eigenvalues " << values(k - 1) << " and " << values(k) << " are not separated";
    throw Error(ErrorKind::EigengapCollapse, os.str());
  }
  return {values, basis * es.eigenvectors().leftCols(k)};
}

IndexReport saddle_index(const HessianOracle& oracle, const Point& x, IndexOptions opts) {
  IndexReport rep;
  rep.gradient_norm = riemannian_grad(oracle.problem(), x).norm();
  rep.advisory = rep.gradient_norm > opts.index_tol;
  const Matrix<> b = tangent_basis(x);
  Eigen::SelfAdjointEigenSolver<Matrix<>> es(oracle.at(x).reduced(b), Eigen::EigenvaluesOnly);
  rep.values = es.eigenvalues();
  const double lhat = rep.values.cwiseAbs().maxCoeff();
  rep.zero_band = opts.zero_band_rel * (1.0 + lhat);
  for (Index i = 0; i < rep.values.size(); ++i) {
    const double v = rep.values(i);
    if (v < -rep.zero_band) {
      ++rep.negative;
    } else if (v > rep.zero_band) {
      ++rep.positive;
    } else {
      ++rep.near_zero;
    }
  }
  return rep;
}

std::optional<SpectralBounds> spectral_bounds(const IndexReport& report) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index i = 0; i < report.values.size(); ++i) {
    const double a = std::abs(report.values(i));
    if (a <= report.zero_band) continue;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (!(hi > 0.0)) return std::nullopt;
  return SpectralBounds(lo, hi);
}

}  // namespace msd
