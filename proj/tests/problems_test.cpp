#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "msd/dynamics.hpp"
#include "msd/problems.hpp"
#include "support.hpp"

using namespace msd;
using msd::test::vec;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[i] = i + 1.0;
  return s;
}

std::vector<SaddleProblem> all_problems() {
  return {sphere_poly(2.0),  sphere_poly(0.1), cylinder_poly(),
          thomson(5),        thomson(6, 1.0),  rayleigh_stiefel(12, 2, one_to(12), 3),
          bec(16, 4.0, 30.0), quadratic({-2.0, 1.0, 7.0})};
}

Matrix<> random_orthogonal(std::mt19937_64& rng, Index p) { return test::random_frame(rng, p, p); }

}  // namespace

TEST_CASE("sphere and cylinder polynomials") {
  const SaddleProblem s = sphere_poly(2.0);
  CHECK(s.energy(vec({0, 1, 0})) == 3.0);
  test::check_close(s.euclid_grad(vec({1, 0, 0})), Vector<>::Zero(3), 0.0);
  CHECK(s.target_index == 1);
  REQUIRE(s.known_saddle);
  test::check_close(*s.known_saddle, vec({0, 1, 0}), 0.0);
  CHECK(s.error_to_known(vec({0, 1, 0})) == 0.0);
  CHECK(s.error_to_known(vec({1, 0, 0})) == doctest::Approx(std::numbers::pi / 2));
  CHECK_THROWS_AS((void)sphere_poly(0.0), Error);

  const SaddleProblem c = cylinder_poly();
  CHECK(c.manifold->kind() == ManifoldKind::Cylinder);
  CHECK(c.energy(vec({0, 1, 0})) == -1.0);
  CHECK(riemannian_grad(c, c.point(vec({0, 1, 0}))).comps.norm() == 0.0);
  const Matrix<> b = tangent_basis(c.point(vec({1, 0, 2})));
  CHECK(b.row(0).norm() <= 1e-15);
  CHECK(b.cols() == 2);
  CHECK(saddle_index(HessianOracle::for_problem(c), c.point(vec({0, 1, 0}))).negative == 1);
}

TEST_CASE("thomson energy and symmetry") {
  const SaddleProblem t3 = thomson(3);
  // two poles (‖Δ‖² = 4) and one equatorial particle (‖Δ‖² = 2 to each pole)
  CHECK(t3.energy(vec({0, 0, 1, 0, 0, -1, 1, 0, 0})) == doctest::Approx(0.25 + 2 * 0.5).epsilon(1e-15));

  const SaddleProblem t = thomson(5);
  REQUIRE(t.known_saddle);
  // regular pentagon: chords 2 sin(π/5), 2 sin(2π/5), five pairs each
  const double s1 = std::sin(std::numbers::pi / 5), s2 = std::sin(2 * std::numbers::pi / 5);
  CHECK(t.energy(*t.known_saddle) == doctest::Approx(5 / (4 * s1 * s1) + 5 / (4 * s2 * s2)).epsilon(1e-14));
  const Point ring = t.point(*t.known_saddle);
  CHECK(ring.feasible());
  CHECK(riemannian_grad(t, ring).norm() <= 1e-12);
  const IndexReport rep = saddle_index(HessianOracle::for_problem(t), ring);
  CHECK(rep.negative == 2);
  CHECK(rep.near_zero == 0);
  CHECK(t.target_index == 2);

  // permuting the free particles 3..M
  const Point x = initial_condition(t, "random", 4).x0;
  Vector<> perm = x.coords;
  perm.segment<3>(6).swap(perm.segment<3>(12));
  perm.segment<3>(9).swap(perm.segment<3>(6));
  CHECK(std::abs(t.energy(perm) - t.energy(x.coords)) <= 1e-14 * t.energy(x.coords));

  Vector<> clash = x.coords;
  clash.segment<3>(12) = clash.segment<3>(9);
  CHECK_THROWS_AS((void)t.energy(clash), Error);
  CHECK_THROWS_AS((void)thomson(2), Error);
}

TEST_CASE("thomson upper-half initialization") {
  const SaddleProblem t = thomson(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Point x = initial_condition(t, "upper-half random", seed).x0;
    CHECK(x.feasible());
    for (int i = 0; i < 5; ++i) CHECK(x.coords(3 * i + 2) > 0.0);
    CHECK(x.coords(3) == 0.0);
  }
  CHECK(initial_condition(t, "upper-half random", 7).x0.coords == initial_condition(t, "upper-half random", 7).x0.coords);
}

TEST_CASE("rayleigh quotient on the Stiefel manifold") {
  const int n = 10;
  const SaddleProblem r = rayleigh_stiefel(n, 2, one_to(n), 9);
  REQUIRE(r.known_saddle);
  // [q2 q5] with descending labels carries eigenvalues n−1 and n−4
  CHECK(r.energy(*r.known_saddle) == doctest::Approx(-double((n - 1) + (n - 4))).epsilon(1e-13));
  const Point target = r.point(*r.known_saddle);
  CHECK(riemannian_grad(r, target).norm() <= 1e-12);
  CHECK(r.error_to_known(*r.known_saddle) <= 1e-7);
  const IndexReport rep = saddle_index(HessianOracle::for_problem(r), target);
  CHECK(rep.negative == 4);
  CHECK(rep.near_zero == 1);  // X·Ω, Ω skew
  CHECK(r.target_index == 4);

  const SaddleProblem top = rayleigh_stiefel(n, 2, one_to(n), 9, {1, 2});
  const Point dominant = top.point(*top.known_saddle);
  CHECK(riemannian_grad(top, dominant).norm() <= 1e-12);
  CHECK(top.energy(*top.known_saddle) == doctest::Approx(-double(n + n - 1)).epsilon(1e-13));
  CHECK(saddle_index(HessianOracle::for_problem(top), dominant).negative == 0);

  // invariance under X ↦ XQ
  std::mt19937_64 rng(41);
  const auto& st = static_cast<const Stiefel&>(*r.manifold);
  for (int trial = 0; trial < 10; ++trial) {
    const Point x = initial_condition(r, "random", trial).x0;
    const Matrix<> xq = st.as_matrix(x.coords) * random_orthogonal(rng, 2);
    CHECK(std::abs(r.energy(xq.reshaped()) - r.energy(x.coords)) <= 1e-12 * std::abs(r.energy(x.coords)));
    CHECK(std::abs(r.error_to_known(xq.reshaped()) - r.error_to_known(x.coords)) <= 1e-10);
  }

  CHECK_THROWS_AS((void)rayleigh_stiefel(5, 2, {1, 2, 2, 4, 5}, 0), Error);
  CHECK_THROWS_AS((void)rayleigh_stiefel(5, 5, one_to(5), 0), Error);
  CHECK_THROWS_AS((void)rayleigh_stiefel(5, 2, one_to(5), 0, {2, 2}), Error);
  // same seed, same matrix
  CHECK(rayleigh_stiefel(n, 2, one_to(n), 9).known_saddle->isApprox(*r.known_saddle, 0.0));
}

TEST_CASE("gradients match finite differences of the energy") {
  for (const auto& p : all_problems()) {
    CAPTURE(p.name);
    const auto& m = *p.manifold;
    std::mt19937_64 rng(42);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Point x = initial_condition(p, "random", seed).x0;
      REQUIRE(x.feasible());
      const Vector<> g = p.euclid_grad(x.coords);

      // ambient central difference
      const Vector<> u = test::gaussian(rng, m.ambient_dim()).normalized();
      const double t = 1e-6 * (1 + x.coords.norm());
      const double fd = (p.energy(x.coords + t * u) - p.energy(x.coords - t * u)) / (2 * t);
      CHECK(std::abs(fd - m.inner(g, u)) <= 1e-5 * std::max(1.0, m.norm(g) * std::sqrt(m.metric_scale())));

      // along the retraction curve
      const TangentVector v = test::random_tangent(rng, x);
      const double s = 1e-6;
      const double fr = (p.energy(m.retract(x.coords, s * v.comps)) - p.energy(m.retract(x.coords, -s * v.comps))) / (2 * s);
      const TangentVector rg = riemannian_grad(p, x);
      CHECK(std::abs(fr - m.inner(rg.comps, v.comps)) <= 1e-5 * std::max(1.0, rg.norm()));
      CHECK(rg.tangency_residual() <= 1e-10);
    }
  }
}

TEST_CASE("bec functional") {
  const SaddleProblem b = bec(16, 4.0, 30.0);
  const auto& m = static_cast<const WeightedComplexSphere&>(*b.manifold);
  const GridSpec grid = m.grid();
  CHECK(grid.nodes == 16);
  CHECK(b.target_index == 2);
  CHECK(b.default_init == "two-boundary-vortices");
  CHECK_FALSE(b.known_saddle);

  // constant interior field normalized by h²·count·|c|² = 1
  const double h = grid.spacing();
  const double c = 1 / (h * std::sqrt(double(grid.unknowns())));
  Vector<> flat(2 * grid.unknowns());
  for (Index i = 0; i < grid.unknowns(); ++i) flat.segment<2>(2 * i) << c * 0.6, c * 0.8;
  CHECK(b.point(flat).violation() <= 1e-14);

  // global phase invariance
  const Point x = initial_condition(b, "random", 3).x0;
  Vector<> rotated(x.coords.size());
  const double ca = std::cos(0.7), sa = std::sin(0.7);
  for (Index i = 0; i < grid.unknowns(); ++i) {
    const double re = x.coords(2 * i), im = x.coords(2 * i + 1);
    rotated.segment<2>(2 * i) << ca * re - sa * im, sa * re + ca * im;
  }
  CHECK(std::abs(b.energy(rotated) - b.energy(x.coords)) <= 1e-12 * b.energy(x.coords));

  for (const char* d : {"two-boundary-vortices", "central-vortex", "ground"}) {
    CHECK(initial_condition(b, d, 0).x0.violation() <= 1e-12);
  }
  CHECK_THROWS_AS((void)initial_condition(b, "three-vortices", 0), Error);
  CHECK_THROWS_AS((void)bec(8, 4.0, 30.0), Error);
}

TEST_CASE("bec phase mode is a null direction at a converged state") {
  const SaddleProblem b = bec(16, 4.0, 30.0);
  RunConfig c;
  c.k = 0;
  c.eig_mode = EigMode::EulerReflector;
  c.dt = 0.01;
  c.grad_tol = 1e-9;
  c.max_iters = 20000;
  c.error_metric = ErrorMetric::GradNorm;
  const RunRecord rec = run(b, c, initial_condition(b, "ground", 0).x0);
  REQUIRE(rec.status == RunStatus::Converged);
  const Point& x = rec.final_state->x;
  const auto& m = *b.manifold;
  Vector<> iphi(x.coords.size());
  for (Index i = 0; i < iphi.size() / 2; ++i) iphi.segment<2>(2 * i) << -x.coords(2 * i + 1), x.coords(2 * i);
  const HessianOracle h = HessianOracle::for_problem(b);
  const EigenResult e = exact_unstable_eigs(h, x, 0);
  const double lhat = e.values.cwiseAbs().maxCoeff();
  CHECK(m.norm(h.hess_vec(x, {x, iphi}).comps) <= 1e-4 * (1 + lhat) * m.norm(iphi));
  CHECK(std::abs(e.values(0)) <= 1e-4 * (1 + lhat));
  CHECK(e.values(1) > 1e-2);
  CHECK(bec_winding(static_cast<const WeightedComplexSphere&>(m).grid(), x.coords, 2.0) == 0);
}

TEST_CASE("vortex fields and grid dumps") {
  const GridSpec grid{32, 8.0};
  const Vector<> one = bec_vortex_field(grid, 300.0, {{0.0, 0.0}});
  CHECK(grid.spacing() * one.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bec_winding(grid, one, 2.0) == 1);
  const Vector<> two = bec_vortex_field(grid, 300.0, {{-1.5, 0.3}, {1.5, 0.3}});
  CHECK(bec_winding(grid, two, 3.0) == 2);
  CHECK(bec_winding(grid, two, 0.5) == 0);
  CHECK(bec_winding(grid, bec_vortex_field(grid, 300.0, {}), 3.0) == 0);

  const auto path = (std::filesystem::temp_directory_path() / "msd_dump_test.bin").string();
  write_grid_dump(path, grid, two);
  CHECK(std::filesystem::file_size(path) == 12 + 32 * 32 * 16);
  const GridDump back = read_grid_dump(path);
  CHECK(back.nodes == 32);
  CHECK(back.interior == two);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)read_grid_dump(path), Error);
}

TEST_CASE("initial conditions") {
  const SaddleProblem s = sphere_poly(2.0);
  const Point near = initial_condition(s, "near-saddle", 5).x0;
  CHECK(near.feasible());
  CHECK(s.error_to_known(near.coords) == doctest::Approx(std::atan(0.1)).epsilon(1e-12));
  CHECK(initial_condition(s, "near-saddle", 5).x0.coords == near.coords);
  CHECK(initial_condition(s, "near-saddle", 6).x0.coords != near.coords);
  CHECK_THROWS_AS((void)initial_condition(s, "far-away", 0), Error);
  try {
    (void)initial_condition(s, "far-away", 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownDescriptor);
  }

  for (const auto& p : all_problems()) {
    CAPTURE(p.name);
    for (const auto& d : {p.default_init, std::string("random")}) {
      const InitialCondition ic = initial_condition(p, d, 11);
      CHECK(ic.x0.feasible());
      CHECK(ic.x0.coords.allFinite());
    }
  }
}

TEST_CASE("problem registry") {
  ProblemParams q;
  q.n = 12;
  q.grid_n = 16;
  for (const auto& name : problem_names()) {
    CAPTURE(name);
    const SaddleProblem p = make_problem(name, q);
    CHECK(p.name == name);
    CHECK(p.manifold);
    CHECK(p.initializer);
  }
  CHECK_THROWS_AS((void)make_problem("torus", q), Error);
  q.p = 3;
  CHECK(make_problem("rayleigh", q).target_index == 3);
}
