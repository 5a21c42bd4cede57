#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msd/problem.hpp"

namespace msd {

/// f(x, y, z) = (x² − 1)² + a y² + 2a z² on S².
[[nodiscard]] SaddleProblem sphere_poly(double a);

/// f(x, y, z) = −y² − 0.05 z² on the cylinder x² + y² = 1.
[[nodiscard]] SaddleProblem cylinder_poly();

/// Σ_{i<j} ‖x_i − x_j‖^{−exponent} for M unit vectors, x_1 pinned to the north
/// pole and x_2 confined to the yz-plane.
[[nodiscard]] SaddleProblem thomson(int M, double exponent = 2.0);

/// f(X) = −tr(XᵀAX) on St(n, p), A = Q diag(spectrum) Qᵀ with a seeded random
/// orthogonal Q. Eigenvectors are labelled by decreasing eigenvalue, so q_1
/// spans the dominant direction; `target` lists the labels of the known
/// saddle's column space and its index is Σ_j (target_j − j).
[[nodiscard]] SaddleProblem rayleigh_stiefel(int n, int p, const std::vector<double>& spectrum, std::uint64_t seed,
                                             const std::vector<int>& target = {2, 5});

/// Discrete 2-D Gross–Pitaevskii energy on [−M, M]² with homogeneous Dirichlet
/// boundary, V = ‖x‖²/2 and normalization h²Σ|φ|² = 1. grid_n counts nodes per
/// dimension including the boundary.
[[nodiscard]] SaddleProblem bec(int grid_n, double half_width, double beta);

/// f(x) = ½ Σ d_i x_i² on ℝ^d; the saddle is the origin with index #{d_i < 0}.
[[nodiscard]] SaddleProblem quadratic(const std::vector<double>& diag);

/// Dispatches to problem.initializer; throws UnknownDescriptor.
[[nodiscard]] InitialCondition initial_condition(const SaddleProblem& problem, const std::string& descriptor,
                                                 std::uint64_t seed);

/// Parameters for building a problem by name.
struct ProblemParams {
  double a = 2.0;
  int M = 5;
  double exponent = 2.0;
  int n = 100;
  int p = 2;
  std::uint64_t seed = 0;  // Rayleigh matrix seed
  int grid_n = 64;
  double half_width = 8.0;
  double beta = 300.0;
  std::vector<double> diag = {-1.0, 100.0};
};

/// "sphere", "cylinder", "thomson", "rayleigh", "bec", "quadratic".
[[nodiscard]] SaddleProblem make_problem(const std::string& name, const ProblemParams& params);
[[nodiscard]] const std::vector<std::string>& problem_names();

// ---------------------------------------------------------------------------
// BEC helpers

/// Interior-grid field (interleaved re/im) for a product of +1 vortices at the
/// given centres on a Thomas–Fermi amplitude, normalized.
[[nodiscard]] Vector<> bec_vortex_field(const GridSpec& grid, double beta,
                                        const std::vector<std::pair<double, double>>& centres);

/// Full grid dump: three int32 header words (nodes, nodes, 2) followed by the
/// row-major node values, boundary included, as interleaved little-endian
/// float64 pairs.
void write_grid_dump(const std::string& path, const GridSpec& grid, const Vector<>& interior);

struct GridDump {
  Index nodes = 0;
  Vector<> interior;  // boundary values dropped
};
[[nodiscard]] GridDump read_grid_dump(const std::string& path);

/// Winding number of the phase along the boundary of the square of half-width
/// `radius` centred at the origin (nearest interior nodes).
[[nodiscard]] int bec_winding(const GridSpec& grid, const Vector<>& interior, double radius);

}  // namespace msd
