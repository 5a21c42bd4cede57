#include "msd/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace msd {

const char* to_string(Method m) { return m == Method::CSD ? "csd" : "mcsd"; }
const char* to_string(EigMode m) { return m == EigMode::Exact ? "exact" : "euler"; }
const char* to_string(ErrorMetric m) { return m == ErrorMetric::GeodesicToKnown ? "geodesic" : "grad_norm"; }

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::EigengapCollapse: return "EigengapCollapse";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Rate predictions

double predicted_rate(Method method, const SpectralBounds& bounds, double dt, double gamma) {
  double worst = 0.0;
  for (const double lam : {bounds.mu, bounds.L}) {
    if (method == Method::CSD) {
      worst = std::max(worst, std::abs(1.0 - dt * lam));
    } else {
      worst = std::max(worst, std::abs(hb_block_eigenvalues(lam, dt, gamma).first));
    }
  }
  return worst;
}

double csd_rate_bound(const SpectralBounds& bounds, double dt) { return 1.0 - 0.5 * dt * bounds.mu; }

double mcsd_rate_bound(const SpectralBounds& bounds) { return 1.0 - 1.0 / (1.0 + std::sqrt(bounds.kappa())); }

double inexact_csd_rate_bound(const SpectralBounds& bounds, double theta) {
  return 1.0 - bounds.mu / (2.0 * bounds.L) + theta;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (method == Method::CSD && gamma != 0.0) fail("CSD requires gamma = 0");
  if (k < 0) fail("saddle index k must be non-negative");
  if (max_iters < 0) fail("max_iters must be non-negative");
  if (!(grad_tol > 0.0)) fail("grad_tol must be positive");
}

std::optional<int> RunRecord::iterations_to(double threshold) const {
  for (const auto& row : rows) {
    if (row.error <= threshold) return row.n;
  }
  return std::nullopt;
}

IterateState initial_state(const HessianOracle& oracle, const Point& x0, int k, const std::optional<Matrix<>>& frame) {
  Reflector R = frame ? make_reflector(x0, *frame, 1e-8) : Reflector{x0, exact_unstable_eigs(oracle, x0, k).vectors};
  if (R.k() != k) throw Error(ErrorKind::InvalidArgument, "initial frame width differs from k");
  return {x0, zero_tangent(x0), std::move(R), 0};
}

namespace {

IterateState advance(const HessianOracle& oracle, const IterateState& s, const RunConfig& c, const Vector<>& grad) {
  const auto& m = *s.x.manifold;
  const bool momentum = c.method == Method::MCSD;

  // r̄ = −Δt R grad f(x_n) + γ r_n
  Vector<> rbar = -c.dt * reflect(s.R.frame, grad);
  if (momentum) rbar += c.gamma * s.r.comps;
  const TangentVector step_vec{s.x, rbar};

  IterateState next;
  next.n = s.n + 1;
  next.x = retract(s.x, step_vec);
  next.r = momentum ? TangentVector{next.x, m.transport(s.x.coords, rbar, rbar)} : zero_tangent(next.x);
  if (momentum && rbar.isZero(0.0)) next.r = zero_tangent(next.x);

  if (c.eig_mode == EigMode::Exact) {
    next.R = Reflector{next.x, exact_unstable_eigs(oracle, next.x, c.k).vectors};
    return next;
  }

  Reflector hat;
  if (c.reflector_update == ReflectorUpdate::LowRank) {
    const Matrix<> hv = oracle.at(s.x).apply(s.R.frame);
    hat = Reflector{s.x, lowrank_euler_orth(s.R.frame, hv, c.dt).frame};
  } else {
    const SymOperator h{s.x, oracle.ambient_matrix(s.x)};
    hat = orth(euler_reflector_step(s.R, h, c.dt), c.k);
  }
  next.R = transport_reflector(hat, next.x, step_vec);
  return next;
}

void require_mode(const RunConfig& c, Method method, EigMode mode, const char* who) {
  c.validate();
  if (c.method != method || c.eig_mode != mode) {
    throw Error(ErrorKind::InvalidArgument, std::string(who) + ": configuration does not match the scheme");
  }
}

IterateState checked_step(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  return advance(oracle, s, c, riemannian_grad(oracle.problem(), s.x).comps);
}

}  // namespace

IterateState step_csd_exact(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  require_mode(c, Method::CSD, EigMode::Exact, "step_csd_exact");
  return checked_step(oracle, s, c);
}

IterateState step_mcsd_exact(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  require_mode(c, Method::MCSD, EigMode::Exact, "step_mcsd_exact");
  return checked_step(oracle, s, c);
}

IterateState step_csd_euler(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  require_mode(c, Method::CSD, EigMode::EulerReflector, "step_csd_euler");
  return checked_step(oracle, s, c);
}

IterateState step_mcsd_euler(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  require_mode(c, Method::MCSD, EigMode::EulerReflector, "step_mcsd_euler");
  return checked_step(oracle, s, c);
}

IterateState step(const HessianOracle& oracle, const IterateState& s, const RunConfig& c) {
  c.validate();
  return checked_step(oracle, s, c);
}

// ---------------------------------------------------------------------------

RunRecord run(const SaddleProblem& problem, const RunConfig& config, const Point& x0,
              const std::optional<Matrix<>>& frame) {
  return run(HessianOracle::for_problem(problem), config, x0, frame);
}

RunRecord run(const HessianOracle& oracle, const RunConfig& config, const Point& x0,
              const std::optional<Matrix<>>& frame) {
  config.validate();
  const auto& problem = oracle.problem();
  RunRecord record;

  if (config.lipschitz) {
    const double L = *config.lipschitz;
    std::ostringstream os;
    if (config.method == Method::CSD && config.dt > 1.0 / L) {
      os << "dt = " << config.dt << " exceeds 1/L = " << 1.0 / L;
    } else if (config.eig_mode == EigMode::EulerReflector && config.dt >= 0.5 / L) {
      os << "dt = " << config.dt << " is not below 1/(2L) = " << 0.5 / L;
    }
    if (!os.str().empty()) record.warnings.push_back(os.str());
  }
  const bool use_known = config.error_metric == ErrorMetric::GeodesicToKnown && problem.error_to_known;
  if (config.error_metric == ErrorMetric::GeodesicToKnown && !use_known) {
    record.warnings.push_back("no known saddle for this problem; error column is the gradient norm");
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  auto fail = [&](RunStatus status, const std::string& msg) {
    record.status = status;
    record.message = msg;
  };
  auto status_for = [](const Error& e) {
    switch (e.kind()) {
      case ErrorKind::EigengapCollapse:
      case ErrorKind::TransportDegeneracy: return RunStatus::EigengapCollapse;
      default: return RunStatus::Diverged;
    }
  };

  IterateState state;
  try {
    state = initial_state(oracle, x0, config.k, frame);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw;
    fail(status_for(e), e.what());
    return record;
  }

  for (;;) {
    const auto& x = state.x;
    const Vector<> grad = riemannian_grad(problem, x).comps;
    RunRow row;
    row.n = state.n;
    row.energy = problem.energy(x.coords);
    row.grad_norm = x.manifold->norm(grad);
    if (!x.coords.allFinite() || !std::isfinite(row.energy) || !std::isfinite(row.grad_norm) ||
        std::abs(row.energy) > config.divergence_threshold) {
      fail(RunStatus::Diverged, "iterate became non-finite or the energy blew up at n = " + std::to_string(state.n));
      break;
    }
    row.error = use_known ? problem.error_to_known(x.coords) : row.grad_norm;
    row.constraint_violation = x.violation();
    if (config.track_projector_error && config.eig_mode == EigMode::EulerReflector) {
      try {
        row.projector_error = projector_distance(state.R.frame, exact_unstable_eigs(oracle, x, config.k).vectors);
      } catch (const Error&) {
        // leave NaN: the exact eigenvectors are not defined here
      }
    }
    row.wall_time_s = elapsed();
    record.rows.push_back(row);

    if (row.grad_norm <= config.grad_tol) {
      record.status = RunStatus::Converged;
      break;
    }
    if (state.n >= config.max_iters) {
      record.status = RunStatus::MaxIters;
      break;
    }
    try {
      state = advance(oracle, state, config, grad);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::InvalidArgument) throw;
      fail(status_for(e), e.what());
      break;
    }
  }
  record.final_state = std::move(state);
  return record;
}

// ---------------------------------------------------------------------------

RateFit fit_rate(const std::vector<RunRow>& rows, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "tail_fraction must lie in (0, 1]");
  }
  std::vector<const RunRow*> usable;
  for (const auto& r : rows) {
    if (std::isfinite(r.error) && r.error > kRoundingFloor) usable.push_back(&r);
  }
  const auto count = static_cast<std::size_t>(std::ceil(tail_fraction * double(usable.size())));
  if (count < 20) {
    throw Error(ErrorKind::InsufficientData,
                "need at least 20 tail rows above the rounding floor, have " + std::to_string(count));
  }
  const std::size_t first = usable.size() - count;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = first; i < usable.size(); ++i) {
    sx += usable[i]->n;
    sy += std::log(usable[i]->error);
  }
  const double mx = sx / double(count);
  const double my = sy / double(count);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = first; i < usable.size(); ++i) {
    const double dx = usable[i]->n - mx;
    const double dy = std::log(usable[i]->error) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  RateFit fit;
  fit.rate = std::exp(slope);
  fit.rows_used = static_cast<int>(count);
  const double ss_res = std::max(0.0, syy - slope * sxy);
  // A series that is flat up to rounding is fitted exactly.
  const double noise = 1e-14 * std::max(1.0, std::abs(my));
  fit.r_squared = syy > double(count) * noise * noise ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double estimate_rate(const RunRecord& record, double tail_fraction) { return fit_rate(record.rows, tail_fraction).rate; }

}  // namespace msd
