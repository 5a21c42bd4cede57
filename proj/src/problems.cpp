#include "msd/problems.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace msd {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Vector<> gaussian(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector<> v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

// Initial conditions draw from their own stream so they stay uncorrelated
// with any randomness used to build the problem from the same seed.
std::mt19937_64 init_rng(std::uint64_t seed) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

// Unit-norm (manifold metric) random tangent vector at x.
Vector<> random_tangent(const Manifold& m, const Vector<>& x, std::mt19937_64& rng) {
  Vector<> t = m.project(x, gaussian(m.ambient_dim(), rng));
  return t / m.norm(t);
}

[[noreturn]] void unknown(const std::string& problem, const std::string& descriptor) {
  throw Error(ErrorKind::UnknownDescriptor, "problem '" + problem + "' has no initial condition '" + descriptor + "'");
}

// Geodesic distance between unit vectors, accurate for nearby points.
double sphere_distance(const Vector<>& a, const Vector<>& b) {
  return 2.0 * std::asin(std::min(1.0, 0.5 * (a - b).norm()));
}

}  // namespace

// ---------------------------------------------------------------------------

SaddleProblem sphere_poly(double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "sphere_poly needs a > 0");
  SaddleProblem p;
  p.name = "sphere";
  p.manifold = std::make_shared<UnitSphere>(3);
  p.energy = [a](const Vector<>& x) {
    const double s = x(0) * x(0) - 1.0;
    return s * s + a * x(1) * x(1) + 2.0 * a * x(2) * x(2);
  };
  p.euclid_grad = [a](const Vector<>& x) {
    Vector<> g(3);
    g << 4.0 * x(0) * (x(0) * x(0) - 1.0), 2.0 * a * x(1), 4.0 * a * x(2);
    return g;
  };
  p.euclid_hess_vec = [a](const Vector<>& x, const Vector<>& v) {
    Vector<> h(3);
    h << (12.0 * x(0) * x(0) - 4.0) * v(0), 2.0 * a * v(1), 4.0 * a * v(2);
    return h;
  };
  const Vector<> xs = Vector<>::Unit(3, 1);
  p.known_saddle = xs;
  p.error_to_known = [xs](const Vector<>& x) { return sphere_distance(x, xs); };
  p.target_index = 1;
  p.parameters = {{"a", fmt(a)}};
  p.initializer = [m = p.manifold, xs](const std::string& d, std::uint64_t seed) -> InitialCondition {
    auto rng = init_rng(seed);
    if (d == "near-saddle") {
      return {make_point(m, (xs + 0.1 * random_tangent(*m, xs, rng)).normalized()), std::nullopt};
    }
    if (d == "random") return {make_point(m, gaussian(3, rng).normalized()), std::nullopt};
    unknown("sphere", d);
  };
  return p;
}

SaddleProblem cylinder_poly() {
  SaddleProblem p;
  p.name = "cylinder";
  p.manifold = std::make_shared<Cylinder>(1, 2);
  p.energy = [](const Vector<>& x) { return -x(1) * x(1) - 0.05 * x(2) * x(2); };
  p.euclid_grad = [](const Vector<>& x) {
    Vector<> g(3);
    g << 0.0, -2.0 * x(1), -0.1 * x(2);
    return g;
  };
  p.euclid_hess_vec = [](const Vector<>&, const Vector<>& v) {
    Vector<> h(3);
    h << 0.0, -2.0 * v(1), -0.1 * v(2);
    return h;
  };
  const Vector<> xs = Vector<>::Unit(3, 1);
  p.known_saddle = xs;
  p.error_to_known = [xs](const Vector<>& x) {
    const double angle = sphere_distance(x.head(2), xs.head(2));
    return std::hypot(angle, x(2) - xs(2));
  };
  p.target_index = 1;
  p.initializer = [m = p.manifold, xs](const std::string& d, std::uint64_t seed) -> InitialCondition {
    auto rng = init_rng(seed);
    if (d == "near-saddle") return {make_point(m, m->retract(xs, 0.1 * random_tangent(*m, xs, rng))), std::nullopt};
    if (d == "random") {
      Vector<> x = gaussian(3, rng);
      x.head(2).normalize();
      return {make_point(m, x), std::nullopt};
    }
    unknown("cylinder", d);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Thomson

namespace {

struct PairTerms {
  int M;
  double s;

  Eigen::Vector3d at(const Vector<>& x, int i) const { return x.segment<3>(3 * i); }

  double dist(const Vector<>& x, int i, int j) const {
    const double r = (at(x, i) - at(x, j)).norm();
    if (r < 1e-8) {
      throw Error(ErrorKind::CoincidentParticles,
                  "particles " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");
    }
    return r;
  }

  double energy(const Vector<>& x) const {
    double e = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = i + 1; j < M; ++j) e += std::pow(dist(x, i, j), -s);
    return e;
  }

  Vector<> grad(const Vector<>& x) const {
    Vector<> g = Vector<>::Zero(3 * M);
    for (int i = 0; i < M; ++i) {
      for (int j = i + 1; j < M; ++j) {
        const Eigen::Vector3d d = at(x, i) - at(x, j);
        const Eigen::Vector3d gi = -s * std::pow(dist(x, i, j), -s - 2.0) * d;
        g.segment<3>(3 * i) += gi;
        g.segment<3>(3 * j) -= gi;
      }
    }
    return g;
  }

  Vector<> hess_vec(const Vector<>& x, const Vector<>& v) const {
    Vector<> out = Vector<>::Zero(3 * M);
    for (int i = 0; i < M; ++i) {
      for (int j = i + 1; j < M; ++j) {
        const Eigen::Vector3d d = at(x, i) - at(x, j);
        const double r = dist(x, i, j);
        const Eigen::Vector3d dv = v.segment<3>(3 * i) - v.segment<3>(3 * j);
        const Eigen::Vector3d k =
            -s * std::pow(r, -s - 2.0) * dv + s * (s + 2.0) * std::pow(r, -s - 4.0) * d * d.dot(dv);
        out.segment<3>(3 * i) += k;
        out.segment<3>(3 * j) -= k;
      }
    }
    return out;
  }
};

}  // namespace

SaddleProblem thomson(int M, double exponent) {
  if (M < 3) throw Error(ErrorKind::InvalidArgument, "thomson needs M >= 3");
  if (!(exponent > 0.0)) throw Error(ErrorKind::InvalidArgument, "thomson exponent must be positive");
  std::vector<ProductSphere::Factor> factors;
  factors.push_back({3, {0, 1, 2}, {0.0, 0.0, 1.0}});
  factors.push_back({3, {0}, {0.0}});
  for (int i = 2; i < M; ++i) factors.push_back({3, {}, {}});

  const PairTerms pair{M, exponent};
  SaddleProblem p;
  p.name = "thomson";
  p.manifold = std::make_shared<ProductSphere>(std::move(factors));
  p.energy = [pair](const Vector<>& x) { return pair.energy(x); };
  p.euclid_grad = [pair](const Vector<>& x) { return pair.grad(x); };
  p.euclid_hess_vec = [pair](const Vector<>& x, const Vector<>& v) { return pair.hess_vec(x, v); };

  // Regular ring on the great circle x = 0.
  Vector<> ring(3 * M);
  for (int i = 0; i < M; ++i) {
    const double t = 2.0 * std::numbers::pi * i / M;
    ring.segment<3>(3 * i) << 0.0, std::sin(t), std::cos(t);
  }
  p.known_saddle = ring;
  p.target_index = M == 5 ? 2 : -1;
  p.parameters = {{"M", std::to_string(M)}, {"exponent", fmt(exponent)}};
  p.default_init = "upper-half random";
  p.initializer = [m = p.manifold, M, pair](const std::string& d, std::uint64_t seed) -> InitialCondition {
    auto rng = init_rng(seed);
    if (d != "upper-half random" && d != "upper-half-random" && d != "random") unknown("thomson", d);
    const bool upper = d != "random";
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (;;) {
      Vector<> x(3 * M);
      x.head<3>() << 0.0, 0.0, 1.0;
      const double t = upper ? (ud(rng) - 0.5) * std::numbers::pi * 0.95 : (2.0 * ud(rng) - 1.0) * std::numbers::pi;
      x.segment<3>(3) << 0.0, std::sin(t), std::cos(t);
      for (int i = 2; i < M; ++i) {
        Eigen::Vector3d v = gaussian(3, rng);
        if (upper) v(2) = std::abs(v(2)) + 1e-3;
        x.segment<3>(3 * i) = v.normalized();
      }
      bool separated = true;
      for (int i = 0; i < M && separated; ++i)
        for (int j = i + 1; j < M && separated; ++j)
          separated = (pair.at(x, i) - pair.at(x, j)).norm() > 0.1;
      if (upper) {
        for (int i = 1; i < M; ++i) separated = separated && x(3 * i + 2) > 0.0;
      }
      if (separated) return {make_point(m, x), std::nullopt};
    }
  };
  return p;
}

// ---------------------------------------------------------------------------
// Rayleigh quotient on the Stiefel manifold

SaddleProblem rayleigh_stiefel(int n, int p, const std::vector<double>& spectrum, std::uint64_t seed,
                               const std::vector<int>& target) {
  if (!(p >= 1 && p < n)) throw Error(ErrorKind::InvalidArgument, "rayleigh_stiefel needs 1 <= p < n");
  if (static_cast<int>(spectrum.size()) != n) throw Error(ErrorKind::InvalidArgument, "spectrum must have n entries");
  for (int i = 1; i < n; ++i) {
    if (!(spectrum[i] > spectrum[i - 1])) throw Error(ErrorKind::InvalidArgument, "spectrum must be strictly increasing");
  }
  std::vector<int> labels = target;
  std::sort(labels.begin(), labels.end());
  if (static_cast<int>(labels.size()) != p || labels.front() < 1 || labels.back() > n ||
      std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw Error(ErrorKind::InvalidArgument, "target must list p distinct labels in [1, n]");
  }

  std::mt19937_64 rng(seed);
  Matrix<> g(n, n);
  for (Index j = 0; j < n; ++j) g.col(j) = gaussian(n, rng);
  Eigen::HouseholderQR<Matrix<>> qr(g);
  Matrix<> q = qr.householderQ() * Matrix<>::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  // Column j of Q carries spectrum[j]; label i refers to the i-th largest.
  const Vector<> lam = Eigen::Map<const Vector<>>(spectrum.data(), n);
  const auto a = std::make_shared<const Matrix<>>(q * lam.asDiagonal() * q.transpose());
  auto label = [&](int i) { return q.col(n - i); };

  Matrix<> t(n, p);
  for (int j = 0; j < p; ++j) t.col(j) = label(labels[j]);
  int index = 0;
  for (int j = 0; j < p; ++j) index += labels[j] - (j + 1);

  const auto st = std::make_shared<Stiefel>(n, p);
  SaddleProblem pr;
  pr.name = "rayleigh";
  pr.manifold = st;
  pr.energy = [st, a](const Vector<>& x) {
    const auto X = st->as_matrix(x);
    return -(X.transpose() * (*a) * X).trace();
  };
  pr.euclid_grad = [st, a](const Vector<>& x) -> Vector<> {
    const Matrix<> G = -2.0 * (*a) * st->as_matrix(x);
    return G.reshaped();
  };
  pr.euclid_hess_vec = [st, a](const Vector<>&, const Vector<>& v) -> Vector<> {
    const Matrix<> G = -2.0 * (*a) * st->as_matrix(v);
    return G.reshaped();
  };
  const Vector<> xs = t.reshaped();
  pr.known_saddle = xs;
  pr.error_to_known = [st, t](const Vector<>& x) {
    // Largest principal angle, through its sine for accuracy near zero.
    const auto X = st->as_matrix(x);
    const Matrix<> resid = X - t * (t.transpose() * X);
    Eigen::JacobiSVD<Matrix<>> svd(resid);
    return std::asin(std::min(1.0, svd.singularValues()(0)));
  };
  pr.target_index = index;
  std::ostringstream tl;
  for (std::size_t j = 0; j < labels.size(); ++j) tl << (j ? "," : "") << labels[j];
  pr.parameters = {{"n", std::to_string(n)}, {"p", std::to_string(p)}, {"seed", std::to_string(seed)},
                   {"target", tl.str()}, {"spectrum", fmt(spectrum.front()) + ".." + fmt(spectrum.back())}};
  pr.initializer = [st, xs, n, p](const std::string& d, std::uint64_t s) -> InitialCondition {
    auto r = init_rng(s);
    if (d == "near-saddle") return {make_point(st, st->retract(xs, 0.1 * random_tangent(*st, xs, r))), std::nullopt};
    if (d == "random") {
      const Vector<> z = gaussian(Index(n) * p, r);
      return {make_point(st, st->retract(Vector<>::Zero(z.size()), z)), std::nullopt};
    }
    unknown("rayleigh", d);
  };
  return pr;
}

// ---------------------------------------------------------------------------
// Bose–Einstein condensate

namespace {

struct GpGrid {
  GridSpec grid;
  double beta;
  Vector<> potential;  // per interior node

  GpGrid(GridSpec g, double b) : grid(g), beta(b), potential(g.unknowns()) {
    const Index ni = g.interior();
    for (Index iy = 0; iy < ni; ++iy) {
      for (Index ix = 0; ix < ni; ++ix) {
        const double x = g.coord(ix), y = g.coord(iy);
        potential(iy * ni + ix) = 0.5 * (x * x + y * y);
      }
    }
  }

  // Σ over grid edges (boundary edges included) of ½|φ_p − φ_q|².
  double kinetic(const Vector<>& f) const {
    const Index ni = grid.interior();
    double e = 0.0;
    auto val = [&](Index ix, Index iy, int c) {
      return (ix < 0 || iy < 0 || ix >= ni || iy >= ni) ? 0.0 : f(2 * (iy * ni + ix) + c);
    };
    for (Index iy = -1; iy < ni; ++iy) {
      for (Index ix = -1; ix < ni; ++ix) {
        for (int c = 0; c < 2; ++c) {
          const double here = val(ix, iy, c);
          if (iy >= 0) {
            const double d = val(ix + 1, iy, c) - here;
            e += 0.5 * d * d;
          }
          if (ix >= 0) {
            const double d = val(ix, iy + 1, c) - here;
            e += 0.5 * d * d;
          }
        }
      }
    }
    return e;
  }

  // −Δ_h φ with zero boundary values.
  Vector<> neg_laplacian(const Vector<>& f) const {
    const Index ni = grid.interior();
    const double h2 = grid.spacing() * grid.spacing();
    Vector<> out(f.size());
    for (Index iy = 0; iy < ni; ++iy) {
      for (Index ix = 0; ix < ni; ++ix) {
        const Index u = iy * ni + ix;
        for (int c = 0; c < 2; ++c) {
          double s = 4.0 * f(2 * u + c);
          if (ix > 0) s -= f(2 * (u - 1) + c);
          if (ix + 1 < ni) s -= f(2 * (u + 1) + c);
          if (iy > 0) s -= f(2 * (u - ni) + c);
          if (iy + 1 < ni) s -= f(2 * (u + ni) + c);
          out(2 * u + c) = s / h2;
        }
      }
    }
    return out;
  }

  double energy(const Vector<>& f) const {
    const double h2 = grid.spacing() * grid.spacing();
    double pot = 0.0, quart = 0.0;
    for (Index u = 0; u < potential.size(); ++u) {
      const double rho = f(2 * u) * f(2 * u) + f(2 * u + 1) * f(2 * u + 1);
      pot += potential(u) * rho;
      quart += rho * rho;
    }
    return kinetic(f) + h2 * (pot + 0.5 * beta * quart);
  }

  Vector<> grad(const Vector<>& f) const {
    Vector<> g = neg_laplacian(f);
    for (Index u = 0; u < potential.size(); ++u) {
      const double rho = f(2 * u) * f(2 * u) + f(2 * u + 1) * f(2 * u + 1);
      const double w = 2.0 * potential(u) + 2.0 * beta * rho;
      g(2 * u) += w * f(2 * u);
      g(2 * u + 1) += w * f(2 * u + 1);
    }
    return g;
  }
};

}  // namespace

Vector<> bec_vortex_field(const GridSpec& grid, double beta, const std::vector<std::pair<double, double>>& centres) {
  const Index ni = grid.interior();
  const double mu = std::sqrt(beta / std::numbers::pi);
  const double core = 1.0 / std::sqrt(mu);
  Vector<> f(2 * grid.unknowns());
  for (Index iy = 0; iy < ni; ++iy) {
    for (Index ix = 0; ix < ni; ++ix) {
      const double x = grid.coord(ix), y = grid.coord(iy);
      double amp = std::sqrt(std::max(0.0, mu - 0.5 * (x * x + y * y)));
      double phase = 0.0;
      for (const auto& [cx, cy] : centres) {
        const double r = std::hypot(x - cx, y - cy);
        amp *= r / std::sqrt(r * r + core * core);
        phase += std::atan2(y - cy, x - cx);
      }
      const Index u = iy * ni + ix;
      f(2 * u) = amp * std::cos(phase);
      f(2 * u + 1) = amp * std::sin(phase);
    }
  }
  const double h = grid.spacing();
  return f / (h * f.norm());
}

SaddleProblem bec(int grid_n, double half_width, double beta) {
  if (grid_n < 16) throw Error(ErrorKind::InvalidArgument, "bec needs grid_n >= 16");
  if (!(half_width > 0.0) || !(beta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bec needs M > 0 and beta >= 0");
  const GridSpec grid{grid_n, half_width};
  const auto gp = std::make_shared<const GpGrid>(grid, beta);
  SaddleProblem p;
  p.name = "bec";
  p.manifold = std::make_shared<WeightedComplexSphere>(grid);
  p.energy = [gp](const Vector<>& x) { return gp->energy(x); };
  p.euclid_grad = [gp](const Vector<>& x) { return gp->grad(x); };
  p.target_index = 2;
  p.default_grad_tol = 1e-6;
  p.default_init = "two-boundary-vortices";
  p.parameters = {{"grid_n", std::to_string(grid_n)}, {"M", fmt(half_width)}, {"beta", fmt(beta)},
                  {"grid_convention", "nodes include boundary"}, {"vortex_centres", "(-6,6),(6,6)"}};
  p.initializer = [m = p.manifold, grid, beta](const std::string& d, std::uint64_t seed) -> InitialCondition {
    if (d == "two-boundary-vortices") return {make_point(m, bec_vortex_field(grid, beta, {{-6.0, 6.0}, {6.0, 6.0}})), {}};
    if (d == "central-vortex") return {make_point(m, bec_vortex_field(grid, beta, {{0.0, 0.0}})), {}};
    if (d == "ground") return {make_point(m, bec_vortex_field(grid, beta, {})), {}};
    if (d == "random") {
      auto rng = init_rng(seed);
      const Vector<> f = gaussian(2 * grid.unknowns(), rng);
      return {make_point(m, f / (grid.spacing() * f.norm())), {}};
    }
    unknown("bec", d);
  };
  return p;
}

void write_grid_dump(const std::string& path, const GridSpec& grid, const Vector<>& interior) {
  static_assert(std::endian::native == std::endian::little, "grid dumps are written in host byte order");
  if (interior.size() != 2 * grid.unknowns()) throw Error(ErrorKind::InvalidArgument, "field size does not match grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  const std::int32_t header[3] = {static_cast<std::int32_t>(grid.nodes), static_cast<std::int32_t>(grid.nodes), 2};
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  const Index ni = grid.interior();
  for (Index iy = 0; iy < grid.nodes; ++iy) {
    for (Index ix = 0; ix < grid.nodes; ++ix) {
      double v[2] = {0.0, 0.0};
      if (iy > 0 && ix > 0 && iy <= ni && ix <= ni) {
        const Index u = (iy - 1) * ni + (ix - 1);
        v[0] = interior(2 * u);
        v[1] = interior(2 * u + 1);
      }
      out.write(reinterpret_cast<const char*>(v), sizeof v);
    }
  }
  if (!out) throw Error(ErrorKind::InvalidArgument, "write failed: " + path);
}

GridDump read_grid_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::int32_t header[3];
  if (!in.read(reinterpret_cast<char*>(header), sizeof header) || header[0] != header[1] || header[2] != 2 ||
      header[0] < 3) {
    throw Error(ErrorKind::InvalidArgument, "bad grid dump header in " + path);
  }
  const Index nodes = header[0];
  const Index ni = nodes - 2;
  GridDump dump{nodes, Vector<>(2 * ni * ni)};
  for (Index iy = 0; iy < nodes; ++iy) {
    for (Index ix = 0; ix < nodes; ++ix) {
      double v[2];
      if (!in.read(reinterpret_cast<char*>(v), sizeof v)) throw Error(ErrorKind::InvalidArgument, "truncated grid dump");
      if (iy > 0 && ix > 0 && iy <= ni && ix <= ni) {
        const Index u = (iy - 1) * ni + (ix - 1);
        dump.interior(2 * u) = v[0];
        dump.interior(2 * u + 1) = v[1];
      }
    }
  }
  return dump;
}

int bec_winding(const GridSpec& grid, const Vector<>& f, double radius) {
  const Index ni = grid.interior();
  auto nearest = [&](double c) {
    const auto i = static_cast<Index>(std::lround((c + grid.half_width) / grid.spacing())) - 1;
    return std::clamp<Index>(i, 0, ni - 1);
  };
  const Index lo = nearest(-radius), hi = nearest(radius);
  std::vector<std::pair<Index, Index>> loop;
  for (Index i = lo; i < hi; ++i) loop.emplace_back(i, lo);
  for (Index i = lo; i < hi; ++i) loop.emplace_back(hi, i);
  for (Index i = hi; i > lo; --i) loop.emplace_back(i, hi);
  for (Index i = hi; i > lo; --i) loop.emplace_back(lo, i);
  double total = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto [ax, ay] = loop[k];
    const auto [bx, by] = loop[(k + 1) % loop.size()];
    const Index ua = ay * ni + ax, ub = by * ni + bx;
    const double pa = std::atan2(f(2 * ua + 1), f(2 * ua));
    const double pb = std::atan2(f(2 * ub + 1), f(2 * ub));
    total += std::remainder(pb - pa, 2.0 * std::numbers::pi);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// ---------------------------------------------------------------------------

SaddleProblem quadratic(const std::vector<double>& diag) {
  if (diag.empty()) throw Error(ErrorKind::InvalidArgument, "quadratic needs at least one coefficient");
  const Vector<> d = Eigen::Map<const Vector<>>(diag.data(), Index(diag.size()));
  SaddleProblem p;
  p.name = "quadratic";
  p.manifold = std::make_shared<EuclideanSpace>(d.size());
  p.energy = [d](const Vector<>& x) { return 0.5 * x.dot(d.cwiseProduct(x)); };
  p.euclid_grad = [d](const Vector<>& x) -> Vector<> { return d.cwiseProduct(x); };
  p.euclid_hess_vec = [d](const Vector<>&, const Vector<>& v) -> Vector<> { return d.cwiseProduct(v); };
  p.known_saddle = Vector<>::Zero(d.size());
  p.error_to_known = [](const Vector<>& x) { return x.norm(); };
  p.target_index = static_cast<int>((d.array() < 0.0).count());
  std::ostringstream os;
  for (Index i = 0; i < d.size(); ++i) os << (i ? "," : "") << fmt(d(i));
  p.parameters = {{"diag", os.str()}};
  p.initializer = [m = p.manifold, n = d.size()](const std::string& desc, std::uint64_t seed) -> InitialCondition {
    auto rng = init_rng(seed);
    if (desc == "ones") return {make_point(m, Vector<>::Ones(n)), std::nullopt};
    if (desc == "near-saddle") return {make_point(m, 0.1 * gaussian(n, rng).normalized()), std::nullopt};
    if (desc == "random") return {make_point(m, gaussian(n, rng)), std::nullopt};
    unknown("quadratic", desc);
  };
  return p;
}

InitialCondition initial_condition(const SaddleProblem& problem, const std::string& descriptor, std::uint64_t seed) {
  if (!problem.initializer) unknown(problem.name, descriptor);
  return problem.initializer(descriptor, seed);
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {"sphere", "cylinder", "thomson", "rayleigh", "bec", "quadratic"};
  return names;
}

SaddleProblem make_problem(const std::string& name, const ProblemParams& q) {
  if (name == "sphere") return sphere_poly(q.a);
  if (name == "cylinder") return cylinder_poly();
  if (name == "thomson") return thomson(q.M, q.exponent);
  if (name == "rayleigh") {
    std::vector<double> spectrum(static_cast<std::size_t>(std::max(q.n, 0)));
    for (int i = 0; i < q.n; ++i) spectrum[i] = i + 1.0;
    std::vector<int> target = {2, 5};
    if (q.p != 2) {
      target.clear();
      for (int j = 0; j < q.p; ++j) target.push_back(j + 2);
    }
    return rayleigh_stiefel(q.n, q.p, spectrum, q.seed, target);
  }
  if (name == "bec") return bec(q.grid_n, q.half_width, q.beta);
  if (name == "quadratic") return quadratic(q.diag);
  throw Error(ErrorKind::InvalidArgument, "unknown problem '" + name + "'");
}

}  // namespace msd
