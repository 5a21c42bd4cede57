#include "msd/geometry.hpp"

#include <cmath>
#include <sstream>

namespace msd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorKind::DegenerateStep: return "DegenerateStep";
    case ErrorKind::BaseMismatch: return "BaseMismatch";
    case ErrorKind::EigengapCollapse: return "EigengapCollapse";
    case ErrorKind::TransportDegeneracy: return "TransportDegeneracy";
    case ErrorKind::ZeroDirection: return "ZeroDirection";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::CoincidentParticles: return "CoincidentParticles";
    case ErrorKind::UnknownDescriptor: return "UnknownDescriptor";
  }
  return "Unknown";
}

const char* to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Euclidean: return "Euclidean";
    case ManifoldKind::UnitSphere: return "UnitSphere";
    case ManifoldKind::ProductSphere: return "ProductSphere";
    case ManifoldKind::Cylinder: return "Cylinder";
    case ManifoldKind::Stiefel: return "Stiefel";
    case ManifoldKind::WeightedComplexSphere: return "WeightedComplexSphere";
  }
  return "Unknown";
}

namespace {

constexpr double kMaxGramCondition = 1e12;

void require_dim(const Manifold& m, const Vector<>& v, const char* what) {
  if (v.size() != m.ambient_dim()) {
    std::ostringstream os;
    os << what << " has length " << v.size() << ", manifold ambient dimension is " << m.ambient_dim();
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
}

// Exponential map and parallel transport on the sphere of radius r through x.
Vector<> sphere_exp(const Vector<>& x, const Vector<>& t, double r) {
  const double nt = t.norm();
  if (nt == 0.0) return x;
  const double theta = nt / r;
  return std::cos(theta) * x + (r * std::sin(theta) / nt) * t;
}

Vector<> sphere_transport(const Vector<>& x, const Vector<>& t, const Vector<>& v, double r) {
  const double nt = t.norm();
  if (nt == 0.0) return v;
  const double theta = nt / r;
  const Vector<> unit = t / nt;
  const double tv = unit.dot(v);
  return v + (std::cos(theta) - 1.0) * tv * unit - std::sin(theta) * tv * (x / r);
}

Vector<> sphere_project(const Vector<>& x, const Vector<>& w) {
  return w - x * (x.dot(w) / x.squaredNorm());
}

}  // namespace

// ---------------------------------------------------------------------------

Vector<> project_via_jacobian(const Matrix<>& a, const Vector<>& w) {
  if (a.cols() == 0) return w;
  const Matrix<> gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix<>> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    throw Error(ErrorKind::RankDeficientConstraints, "AᵀA is numerically singular");
  }
  return w - a * gram.ldlt().solve(a.transpose() * w);
}

Vector<> Manifold::project(const Vector<>& x, const Vector<>& w) const {
  return project_via_jacobian(jacobian(x), w);
}

double Manifold::violation(const Vector<>& x) const {
  if (constraint_count() == 0) return 0.0;
  return constraints(x).cwiseAbs().maxCoeff();
}

Vector<> Manifold::multipliers(const Vector<>& x, const Vector<>& g) const {
  const Matrix<> a = jacobian(x);
  if (a.cols() == 0) return Vector<>();
  const Matrix<> gram = a.transpose() * a;
  return gram.ldlt().solve(a.transpose() * g);
}

Matrix<> Manifold::tangent_basis(const Vector<>& x) const {
  const Index d = ambient_dim();
  const Index m = constraint_count();
  if (m == 0) return Matrix<>::Identity(d, d);
  const Matrix<> a = jacobian(x);
  Eigen::HouseholderQR<Matrix<>> qr(a);
  double lo = std::abs(qr.matrixQR()(0, 0));
  double hi = lo;
  for (Index i = 1; i < m; ++i) {
    lo = std::min(lo, std::abs(qr.matrixQR()(i, i)));
    hi = std::max(hi, std::abs(qr.matrixQR()(i, i)));
  }
  // cond(AᵀA) = cond(R)², estimated from the diagonal of R.
  if (!(lo > 0.0) || (hi / lo) * (hi / lo) > kMaxGramCondition) {
    throw Error(ErrorKind::RankDeficientConstraints, "A(x) is rank deficient");
  }
  Matrix<> q = qr.householderQ() * Matrix<>::Identity(d, d);
  return q.rightCols(d - m);
}

bool same_point(const Point& a, const Point& b) {
  return a.manifold == b.manifold && a.coords.size() == b.coords.size() && a.coords == b.coords;
}

double TangentVector::tangency_residual() const {
  const auto& m = *base.manifold;
  if (m.constraint_count() == 0) return 0.0;
  const Matrix<> a = m.jacobian(base.coords);
  // Columns of A are scaled to unit length so the check is independent of how
  // the constraint functions are normalized.
  const Vector<> col_norms = a.colwise().norm().transpose();
  const Vector<> r = (a.transpose() * comps).cwiseQuotient(col_norms);
  return r.norm() / (1.0 + comps.norm());
}

SpectralBounds::SpectralBounds(double mu_, double L_) : mu(mu_), L(L_) {
  if (!(mu > 0.0) || !(L >= mu)) {
    throw Error(ErrorKind::InvalidArgument, "spectral bounds need 0 < mu <= L");
  }
}

Point make_point(ManifoldPtr manifold, Vector<> coords) {
  if (!manifold) throw Error(ErrorKind::InvalidArgument, "null manifold");
  require_dim(*manifold, coords, "point");
  return Point{std::move(coords), std::move(manifold)};
}

TangentVector zero_tangent(const Point& x) {
  return TangentVector{x, Vector<>::Zero(x.dim())};
}

TangentVector tangent_project(const Point& x, const Vector<>& w) {
  require_dim(*x.manifold, w, "ambient vector");
  return TangentVector{x, x.manifold->project(x.coords, w)};
}

Point retract(const Point& x, const TangentVector& eta) {
  if (!same_point(x, eta.base)) throw Error(ErrorKind::BaseMismatch, "retract: eta is not based at x");
  if (eta.comps.isZero(0.0)) return x;
  return Point{x.manifold->retract(x.coords, eta.comps), x.manifold};
}

TangentVector transport(const Point& x, const TangentVector& eta, const TangentVector& v) {
  if (!same_point(x, eta.base) || !same_point(x, v.base)) {
    throw Error(ErrorKind::BaseMismatch, "transport: vectors are not based at x");
  }
  if (eta.comps.isZero(0.0)) return v;
  Point dest = retract(x, eta);
  Vector<> moved = x.manifold->transport(x.coords, eta.comps, v.comps);
  return TangentVector{std::move(dest), std::move(moved)};
}

Matrix<> tangent_basis(const Point& x) { return x.manifold->tangent_basis(x.coords); }

// ---------------------------------------------------------------------------
// Euclidean

EuclideanSpace::EuclideanSpace(Index dim) : Manifold(dim, 0) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "Euclidean dimension must be positive");
}

std::string EuclideanSpace::describe() const {
  return "Euclidean(" + std::to_string(ambient_dim()) + ")";
}

Vector<> EuclideanSpace::constraints(const Vector<>&) const { return Vector<>(); }
Matrix<> EuclideanSpace::jacobian(const Vector<>&) const { return Matrix<>(ambient_dim(), 0); }
Vector<> EuclideanSpace::project(const Vector<>&, const Vector<>& w) const { return w; }
Vector<> EuclideanSpace::retract(const Vector<>& x, const Vector<>& eta) const { return x + eta; }
Vector<> EuclideanSpace::transport(const Vector<>&, const Vector<>&, const Vector<>& v) const {
  return v;
}
Vector<> EuclideanSpace::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                                  const Vector<>&) const {
  return Vector<>::Zero(v.size());
}

// ---------------------------------------------------------------------------
// Sphere

UnitSphere::UnitSphere(Index dim, double radius) : Manifold(dim, 1), radius_(radius) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "sphere needs ambient dimension >= 2");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "sphere radius must be positive");
}

std::string UnitSphere::describe() const {
  std::ostringstream os;
  os << "UnitSphere(" << ambient_dim();
  if (radius_ != 1.0) os << ", r=" << radius_;
  os << ")";
  return os.str();
}

Vector<> UnitSphere::constraints(const Vector<>& x) const {
  return Vector<>::Constant(1, x.squaredNorm() - radius_ * radius_);
}

Matrix<> UnitSphere::jacobian(const Vector<>& x) const { return 2.0 * x; }

Vector<> UnitSphere::project(const Vector<>& x, const Vector<>& w) const { return sphere_project(x, w); }

Vector<> UnitSphere::retract(const Vector<>& x, const Vector<>& eta) const {
  return sphere_exp(x, eta, radius_);
}

Vector<> UnitSphere::transport(const Vector<>& x, const Vector<>& eta, const Vector<>& v) const {
  return sphere_transport(x, eta, v, radius_);
}

Vector<> UnitSphere::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                              const Vector<>& multipliers) const {
  return 2.0 * multipliers(0) * v;
}

// ---------------------------------------------------------------------------
// Cylinder

Cylinder::Cylinder(Index free_dim, Index circle_dim)
    : Manifold(circle_dim + free_dim, 1), circle_dim_(circle_dim) {
  if (circle_dim < 2 || free_dim < 0) {
    throw Error(ErrorKind::InvalidArgument, "cylinder needs circle_dim >= 2 and free_dim >= 0");
  }
}

std::string Cylinder::describe() const {
  return "Cylinder(S^" + std::to_string(circle_dim_ - 1) + " x R^" +
         std::to_string(ambient_dim() - circle_dim_) + ")";
}

Vector<> Cylinder::constraints(const Vector<>& x) const {
  return Vector<>::Constant(1, x.head(circle_dim_).squaredNorm() - 1.0);
}

Matrix<> Cylinder::jacobian(const Vector<>& x) const {
  Matrix<> a = Matrix<>::Zero(ambient_dim(), 1);
  a.col(0).head(circle_dim_) = 2.0 * x.head(circle_dim_);
  return a;
}

Vector<> Cylinder::project(const Vector<>& x, const Vector<>& w) const {
  Vector<> out = w;
  out.head(circle_dim_) = sphere_project(x.head(circle_dim_), w.head(circle_dim_));
  return out;
}

Vector<> Cylinder::retract(const Vector<>& x, const Vector<>& eta) const {
  Vector<> out = x + eta;
  out.head(circle_dim_) = sphere_exp(x.head(circle_dim_), eta.head(circle_dim_), 1.0);
  return out;
}

Vector<> Cylinder::transport(const Vector<>& x, const Vector<>& eta, const Vector<>& v) const {
  Vector<> out = v;
  out.head(circle_dim_) =
      sphere_transport(x.head(circle_dim_), eta.head(circle_dim_), v.head(circle_dim_), 1.0);
  return out;
}

Vector<> Cylinder::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                            const Vector<>& multipliers) const {
  Vector<> out = Vector<>::Zero(v.size());
  out.head(circle_dim_) = 2.0 * multipliers(0) * v.head(circle_dim_);
  return out;
}

// ---------------------------------------------------------------------------
// Product of spheres with pinned coordinates

namespace {

Index count_constraints(const std::vector<ProductSphere::Factor>& factors) {
  Index m = 0;
  for (const auto& f : factors) {
    const auto pinned = static_cast<Index>(f.pinned.size());
    m += pinned + (pinned < f.dim ? 1 : 0);
  }
  return m;
}

Index total_dim(const std::vector<ProductSphere::Factor>& factors) {
  Index d = 0;
  for (const auto& f : factors) d += f.dim;
  return d;
}

}  // namespace

ProductSphere::ProductSphere(std::vector<Factor> factors)
    : Manifold(total_dim(factors), count_constraints(factors)), factors_(std::move(factors)) {
  Index offset = 0;
  Index coff = 0;
  for (const auto& f : factors_) {
    if (f.dim < 2 || f.pinned.size() != f.pinned_value.size()) {
      throw Error(ErrorKind::InvalidArgument, "malformed ProductSphere factor");
    }
    std::vector<bool> is_pinned(static_cast<std::size_t>(f.dim), false);
    for (Index p : f.pinned) {
      if (p < 0 || p >= f.dim) throw Error(ErrorKind::InvalidArgument, "pinned index out of range");
      is_pinned[static_cast<std::size_t>(p)] = true;
    }
    Layout lay{offset, {}, coff, false};
    for (Index i = 0; i < f.dim; ++i) {
      if (!is_pinned[static_cast<std::size_t>(i)]) lay.free.push_back(i);
    }
    lay.has_sphere = !lay.free.empty();
    if (lay.has_sphere) {
      for (double v : f.pinned_value) {
        if (v != 0.0) {
          throw Error(ErrorKind::InvalidArgument,
                      "partially pinned factors must pin coordinates to zero");
        }
      }
      if (lay.free.size() < 2) {
        throw Error(ErrorKind::InvalidArgument, "a sphere factor needs at least two free coordinates");
      }
    } else {
      double n2 = 0.0;
      for (double v : f.pinned_value) n2 += v * v;
      if (std::abs(n2 - 1.0) > 1e-12) {
        throw Error(ErrorKind::InvalidArgument, "fully pinned factor must lie on the unit sphere");
      }
    }
    layout_.push_back(lay);
    offset += f.dim;
    coff += static_cast<Index>(f.pinned.size()) + (lay.has_sphere ? 1 : 0);
  }
}

std::string ProductSphere::describe() const {
  std::ostringstream os;
  os << "ProductSphere(" << factors_.size() << " factors, d=" << ambient_dim()
     << ", m=" << constraint_count() << ")";
  return os.str();
}

template <typename Fn>
void ProductSphere::for_each_free_block(Fn&& fn) const {
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    if (layout_[f].has_sphere) fn(factors_[f], layout_[f]);
  }
}

namespace {

Vector<> gather(const Vector<>& x, Index offset, const std::vector<Index>& idx) {
  Vector<> out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = x(offset + idx[i]);
  return out;
}

void scatter(Vector<>& x, Index offset, const std::vector<Index>& idx, const Vector<>& v) {
  for (std::size_t i = 0; i < idx.size(); ++i) x(offset + idx[i]) = v(static_cast<Index>(i));
}

}  // namespace

Vector<> ProductSphere::constraints(const Vector<>& x) const {
  Vector<> c(constraint_count());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    const auto& lay = layout_[f];
    Index row = lay.constraint_offset;
    for (std::size_t j = 0; j < fac.pinned.size(); ++j) {
      c(row++) = x(lay.offset + fac.pinned[j]) - fac.pinned_value[j];
    }
    if (lay.has_sphere) c(row) = x.segment(lay.offset, fac.dim).squaredNorm() - 1.0;
  }
  return c;
}

Matrix<> ProductSphere::jacobian(const Vector<>& x) const {
  Matrix<> a = Matrix<>::Zero(ambient_dim(), constraint_count());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    const auto& lay = layout_[f];
    Index col = lay.constraint_offset;
    for (Index p : fac.pinned) a(lay.offset + p, col++) = 1.0;
    if (lay.has_sphere) a.col(col).segment(lay.offset, fac.dim) = 2.0 * x.segment(lay.offset, fac.dim);
  }
  return a;
}

Vector<> ProductSphere::project(const Vector<>& x, const Vector<>& w) const {
  Vector<> out = Vector<>::Zero(w.size());
  for_each_free_block([&](const Factor&, const Layout& lay) {
    const Vector<> xf = gather(x, lay.offset, lay.free);
    scatter(out, lay.offset, lay.free, sphere_project(xf, gather(w, lay.offset, lay.free)));
  });
  return out;
}

Vector<> ProductSphere::retract(const Vector<>& x, const Vector<>& eta) const {
  Vector<> out = x;
  for_each_free_block([&](const Factor&, const Layout& lay) {
    const Vector<> xf = gather(x, lay.offset, lay.free);
    scatter(out, lay.offset, lay.free, sphere_exp(xf, gather(eta, lay.offset, lay.free), 1.0));
  });
  return out;
}

Vector<> ProductSphere::transport(const Vector<>& x, const Vector<>& eta, const Vector<>& v) const {
  Vector<> out = Vector<>::Zero(v.size());
  for_each_free_block([&](const Factor&, const Layout& lay) {
    const Vector<> xf = gather(x, lay.offset, lay.free);
    scatter(out, lay.offset, lay.free,
            sphere_transport(xf, gather(eta, lay.offset, lay.free), gather(v, lay.offset, lay.free), 1.0));
  });
  return out;
}

Vector<> ProductSphere::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                                 const Vector<>& multipliers) const {
  // Pin constraints are linear; only the sphere constraints curve.
  Vector<> out = Vector<>::Zero(v.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    const auto& lay = layout_[f];
    if (!lay.has_sphere) continue;
    const double lambda = multipliers(lay.constraint_offset + static_cast<Index>(fac.pinned.size()));
    out.segment(lay.offset, fac.dim) = 2.0 * lambda * v.segment(lay.offset, fac.dim);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stiefel

Stiefel::Stiefel(Index n, Index p) : Manifold(n * p, p * (p + 1) / 2), n_(n), p_(p) {
  if (p < 1 || n <= p) throw Error(ErrorKind::InvalidArgument, "Stiefel needs 1 <= p < n");
}

std::string Stiefel::describe() const {
  return "Stiefel(" + std::to_string(n_) + ", " + std::to_string(p_) + ")";
}

Vector<> Stiefel::constraints(const Vector<>& x) const {
  const auto X = as_matrix(x);
  const Matrix<> g = X.transpose() * X - Matrix<>::Identity(p_, p_);
  Vector<> c(constraint_count());
  Index row = 0;
  for (Index i = 0; i < p_; ++i)
    for (Index j = i; j < p_; ++j) c(row++) = g(i, j);
  return c;
}

Matrix<> Stiefel::jacobian(const Vector<>& x) const {
  const auto X = as_matrix(x);
  Matrix<> a = Matrix<>::Zero(ambient_dim(), constraint_count());
  Index col = 0;
  for (Index i = 0; i < p_; ++i) {
    for (Index j = i; j < p_; ++j) {
      // ∂(x_iᵀx_j)/∂x_i = x_j, ∂/∂x_j = x_i.
      a.col(col).segment(i * n_, n_) += X.col(j);
      a.col(col).segment(j * n_, n_) += X.col(i);
      ++col;
    }
  }
  return a;
}

Vector<> Stiefel::project(const Vector<>& x, const Vector<>& w) const {
  const auto X = as_matrix(x);
  const Eigen::Map<const Matrix<>> W(w.data(), n_, p_);
  Matrix<> out = W - X * sym(X.transpose() * W);
  return Eigen::Map<const Vector<>>(out.data(), out.size());
}

Vector<> Stiefel::retract(const Vector<>& x, const Vector<>& eta) const {
  const auto X = as_matrix(x);
  const Eigen::Map<const Matrix<>> E(eta.data(), n_, p_);
  const Matrix<> y = X + E;
  Eigen::HouseholderQR<Matrix<>> qr(y);
  const Matrix<> r = qr.matrixQR().topRows(p_).triangularView<Eigen::Upper>();
  const double scale = std::max(1.0, y.norm());
  Matrix<> q = qr.householderQ() * Matrix<>::Identity(n_, p_);
  for (Index i = 0; i < p_; ++i) {
    if (std::abs(r(i, i)) <= 1e-12 * scale) {
      throw Error(ErrorKind::DegenerateStep, "X + eta is rank deficient; step too large");
    }
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  }
  return Eigen::Map<const Vector<>>(q.data(), q.size());
}

Vector<> Stiefel::transport(const Vector<>& x, const Vector<>& eta, const Vector<>& v) const {
  return project(retract(x, eta), v);
}

Vector<> Stiefel::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                           const Vector<>& multipliers) const {
  Vector<> out = Vector<>::Zero(v.size());
  Index col = 0;
  for (Index i = 0; i < p_; ++i) {
    for (Index j = i; j < p_; ++j) {
      const double lambda = multipliers(col++);
      if (i == j) {
        out.segment(i * n_, n_) += 2.0 * lambda * v.segment(i * n_, n_);
      } else {
        out.segment(i * n_, n_) += lambda * v.segment(j * n_, n_);
        out.segment(j * n_, n_) += lambda * v.segment(i * n_, n_);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weighted complex sphere

WeightedComplexSphere::WeightedComplexSphere(GridSpec grid)
    : UnitSphere(2 * grid.unknowns(), 1.0 / grid.spacing()),
      grid_(grid),
      weight_(grid.spacing() * grid.spacing()) {
  if (grid.nodes < 4) throw Error(ErrorKind::InvalidArgument, "grid needs at least 4 nodes");
}

std::string WeightedComplexSphere::describe() const {
  std::ostringstream os;
  os << "WeightedComplexSphere(" << grid_.nodes << "x" << grid_.nodes << ", M=" << grid_.half_width
     << ", h=" << grid_.spacing() << ")";
  return os.str();
}

Vector<> WeightedComplexSphere::constraints(const Vector<>& x) const {
  return Vector<>::Constant(1, weight_ * x.squaredNorm() - 1.0);
}

Matrix<> WeightedComplexSphere::jacobian(const Vector<>& x) const { return 2.0 * weight_ * x; }

Vector<> WeightedComplexSphere::constraint_hessian_apply(const Vector<>&, const Vector<>& v,
                                                         const Vector<>& multipliers) const {
  return 2.0 * weight_ * multipliers(0) * v;
}

}  // namespace msd
