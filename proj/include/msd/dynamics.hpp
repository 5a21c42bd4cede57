#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msd/hessian.hpp"
#include "msd/reflector.hpp"

namespace msd {

// ---------------------------------------------------------------------------
// Heavy-ball parameter formulas

/// Δt* = 4/(√L + √μ)², γ* = ((√L − √μ)/(√L + √μ))².
template <typename Scalar>
[[nodiscard]] std::pair<Scalar, Scalar> optimal_heavy_ball(Scalar mu, Scalar L) {
  const Scalar sl = std::sqrt(L);
  const Scalar sm = std::sqrt(mu);
  const Scalar dt = Scalar(4) / ((sl + sm) * (sl + sm));
  const Scalar ratio = (sl - sm) / (sl + sm);
  return {dt, ratio * ratio};
}

[[nodiscard]] inline std::pair<double, double> optimal_heavy_ball(const SpectralBounds& b) {
  return optimal_heavy_ball(b.mu, b.L);
}

/// Roots of λ² − (1 + γ − Δt|λᵢ|)λ + γ, the eigenvalues of the 2×2 momentum
/// block [[1 − Δt|λᵢ|, γ], [−Δt|λᵢ|, γ]]. The first root has the larger modulus.
template <typename Scalar>
[[nodiscard]] std::pair<std::complex<Scalar>, std::complex<Scalar>> hb_block_eigenvalues(Scalar abs_lambda,
                                                                                         Scalar dt, Scalar gamma) {
  using C = std::complex<Scalar>;
  const Scalar b = Scalar(1) + gamma - dt * abs_lambda;
  Scalar disc = b * b - Scalar(4) * gamma;
  // A discriminant within its own rounding error is a double root; taking
  // the square root of the noise would move both roots by O(√ε).
  const Scalar b_err = std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + gamma + dt * abs_lambda);
  if (std::abs(disc) <= Scalar(4) * (Scalar(2) * std::abs(b) * b_err + Scalar(4) * gamma * b_err)) {
    disc = Scalar(0);
  }
  if (disc >= Scalar(0)) {
    // Stable form: the larger-magnitude root from the quadratic formula, the
    // other from Vieta (product = γ).
    const Scalar big = Scalar(0.5) * (b + std::copysign(std::sqrt(disc), b));
    const Scalar small = big != Scalar(0) ? gamma / big : Scalar(0);
    return {C(big), C(small)};
  }
  const Scalar im = Scalar(0.5) * std::sqrt(-disc);
  return {C(Scalar(0.5) * b, im), C(Scalar(0.5) * b, -im)};
}

enum class Method { CSD, MCSD };
enum class EigMode { Exact, EulerReflector };
enum class ErrorMetric { GeodesicToKnown, GradNorm };
/// How the one-step reflector update is evaluated. LowRank needs only H·V
/// and is algebraically identical to Dense, which forms the d × d operator.
enum class ReflectorUpdate { LowRank, Dense };

const char* to_string(Method m);
const char* to_string(EigMode m);
const char* to_string(ErrorMetric m);

/// max over |λ| ∈ {μ, L} of the per-mode contraction factor: |1 − Δt|λ|| for
/// CSD, the larger heavy-ball root modulus for MCSD.
[[nodiscard]] double predicted_rate(Method method, const SpectralBounds& bounds, double dt, double gamma);

/// Conservative CSD bound 1 − Δtμ/2.
[[nodiscard]] double csd_rate_bound(const SpectralBounds& bounds, double dt);
/// MCSD bound at optimal parameters, 1 − 1/(1 + √κ).
[[nodiscard]] double mcsd_rate_bound(const SpectralBounds& bounds);
/// CSD with inexact unstable directions, 1 − μ/(2L) + θ.
[[nodiscard]] double inexact_csd_rate_bound(const SpectralBounds& bounds, double theta);

// ---------------------------------------------------------------------------

struct RunConfig {
  Method method = Method::CSD;
  EigMode eig_mode = EigMode::Exact;
  double dt = 0.01;
  double gamma = 0.0;
  int k = 1;
  int max_iters = 10000;
  double grad_tol = 1e-8;
  ErrorMetric error_metric = ErrorMetric::GeodesicToKnown;
  std::uint64_t seed = 0;
  ReflectorUpdate reflector_update = ReflectorUpdate::LowRank;
  /// Estimate of L, used only for step-size warnings.
  std::optional<double> lipschitz;
  /// Record ‖VVᵀ − V*V*ᵀ‖_F against an exact eigensolve at every iterate
  /// (EulerReflector mode only; costs one dense eigensolve per step).
  bool track_projector_error = false;
  double divergence_threshold = 1e12;

  /// Throws InvalidArgument when the invariants (γ = 0 for CSD, dt > 0, …) fail.
  void validate() const;
};

struct IterateState {
  Point x;
  TangentVector r;  // momentum; zero for CSD
  Reflector R;
  int n = 0;
};

enum class RunStatus { Converged, MaxIters, Diverged, EigengapCollapse };
const char* to_string(RunStatus s);

struct RunRow {
  int n = 0;
  double error = 0.0;
  double grad_norm = 0.0;
  double energy = 0.0;
  double constraint_violation = 0.0;
  double wall_time_s = 0.0;
  double projector_error = std::numeric_limits<double>::quiet_NaN();
};

struct RunRecord {
  std::vector<RunRow> rows;
  RunStatus status = RunStatus::MaxIters;
  std::string message;
  std::vector<std::string> warnings;
  std::optional<IterateState> final_state;

  /// First n with error ≤ threshold.
  [[nodiscard]] std::optional<int> iterations_to(double threshold) const;
};

/// Initial state: r = 0 and V either supplied or the exact unstable
/// eigenvectors at x0 (for both eig modes).
[[nodiscard]] IterateState initial_state(const HessianOracle& oracle, const Point& x0, int k,
                                         const std::optional<Matrix<>>& frame = std::nullopt);

[[nodiscard]] IterateState step_csd_exact(const HessianOracle& oracle, const IterateState& s, const RunConfig& c);
[[nodiscard]] IterateState step_mcsd_exact(const HessianOracle& oracle, const IterateState& s, const RunConfig& c);
[[nodiscard]] IterateState step_csd_euler(const HessianOracle& oracle, const IterateState& s, const RunConfig& c);
[[nodiscard]] IterateState step_mcsd_euler(const HessianOracle& oracle, const IterateState& s, const RunConfig& c);

/// Dispatches on config.method / config.eig_mode.
[[nodiscard]] IterateState step(const HessianOracle& oracle, const IterateState& s, const RunConfig& c);

[[nodiscard]] RunRecord run(const SaddleProblem& problem, const RunConfig& config, const Point& x0,
                            const std::optional<Matrix<>>& frame = std::nullopt);
/// Same, with an explicit Hessian oracle.
[[nodiscard]] RunRecord run(const HessianOracle& oracle, const RunConfig& config, const Point& x0,
                            const std::optional<Matrix<>>& frame = std::nullopt);

struct RateFit {
  double rate = 1.0;
  double r_squared = 1.0;
  int rows_used = 0;
};

inline constexpr double kRoundingFloor = 1e-13;

/// Least-squares fit of log(error) against n over the last `tail_fraction`
/// of rows with error above kRoundingFloor. Throws InsufficientData if fewer
/// than 20 rows qualify.
[[nodiscard]] RateFit fit_rate(const std::vector<RunRow>& rows, double tail_fraction);
[[nodiscard]] double estimate_rate(const RunRecord& record, double tail_fraction);

}  // namespace msd
