#include "msd/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace msd::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kHeader = "iter,error,grad_norm,energy,constraint_violation,wall_time_s";
constexpr double kSidecarTail = 0.5;

// Shortest representation that round-trips.
std::string num(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Method parse_method(const std::string& s) {
  if (s == "csd") return Method::CSD;
  if (s == "mcsd") return Method::MCSD;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + s + "'");
}

EigMode parse_eig(const std::string& s) {
  if (s == "exact") return EigMode::Exact;
  if (s == "euler") return EigMode::EulerReflector;
  throw Error(ErrorKind::InvalidArgument, "unknown eig mode '" + s + "'");
}

ReflectorUpdate parse_update(const std::string& s) {
  if (s == "lowrank") return ReflectorUpdate::LowRank;
  if (s == "dense") return ReflectorUpdate::Dense;
  throw Error(ErrorKind::InvalidArgument, "unknown reflector update '" + s + "'");
}

const char* update_name(ReflectorUpdate u) { return u == ReflectorUpdate::LowRank ? "lowrank" : "dense"; }

struct Prepared {
  SaddleProblem problem;
  RunConfig config;
  InitialCondition ic;
  std::string init;
  std::optional<SpectralBounds> bounds;
};

// Builds the problem, resolves problem-dependent defaults and the starting
// point. Throws msd::Error on configuration problems.
Prepared prepare(const ExperimentSpec& spec, Method method, double gamma) {
  Prepared p{make_problem(spec.problem, spec.params), spec.config, {}, spec.init, std::nullopt};
  auto& c = p.config;
  c.method = method;
  c.gamma = gamma;
  if (c.k < 0) c.k = p.problem.target_index;
  if (c.k < 0) throw Error(ErrorKind::InvalidArgument, "no default index for this problem; pass --k");
  if (!(c.grad_tol > 0.0)) c.grad_tol = p.problem.default_grad_tol;
  c.error_metric = p.problem.error_to_known ? ErrorMetric::GeodesicToKnown : ErrorMetric::GradNorm;
  if (p.init.empty()) p.init = p.problem.default_init;

  if (p.problem.known_saddle) {
    const auto oracle = HessianOracle::for_problem(p.problem);
    p.bounds = spectral_bounds(saddle_index(oracle, p.problem.point(*p.problem.known_saddle)));
  }
  if (spec.auto_hb) {
    if (!p.bounds) throw Error(ErrorKind::InvalidArgument, "--auto-hb needs a problem with a known saddle");
    const auto [dt, g] = optimal_heavy_ball(*p.bounds);
    c.dt = dt;
    if (method == Method::MCSD) c.gamma = g;
  }
  if (p.bounds) c.lipschitz = p.bounds->L;
  c.validate();
  p.ic = initial_condition(p.problem, p.init, c.seed);
  return p;
}

json params_json(const ProblemParams& q) {
  return {{"a", q.a},         {"M", q.M},       {"exponent", q.exponent},     {"n", q.n},
          {"p", q.p},         {"seed", q.seed}, {"grid_n", q.grid_n},         {"half_width", q.half_width},
          {"beta", q.beta},   {"diag", q.diag}};
}

ProblemParams params_from(const json& j) {
  ProblemParams q;
  q.a = j.at("a").get<double>();
  q.M = j.at("M").get<int>();
  q.exponent = j.at("exponent").get<double>();
  q.n = j.at("n").get<int>();
  q.p = j.at("p").get<int>();
  q.seed = j.at("seed").get<std::uint64_t>();
  q.grid_n = j.at("grid_n").get<int>();
  q.half_width = j.at("half_width").get<double>();
  q.beta = j.at("beta").get<double>();
  q.diag = j.at("diag").get<std::vector<double>>();
  return q;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Outcome {
  std::string stem;
  Method method = Method::CSD;
  double gamma = 0.0;
  int code = kOk;
  std::optional<RunRecord> record;
  std::optional<RateFit> fit;
  std::optional<double> predicted;
  std::string log;  // buffered diagnostics
};

Outcome run_one(const ExperimentSpec& spec, Method method, double gamma) {
  Outcome o;
  o.method = method;
  o.gamma = gamma;
  o.stem = run_stem(spec, method, gamma);
  std::ostringstream log;
  try {
    const Prepared p = prepare(spec, method, gamma);
    o.gamma = p.config.gamma;
    o.stem = run_stem(spec, method, o.gamma);
    RunRecord rec = run(p.problem, p.config, p.ic.x0, p.ic.frame);
    for (const auto& w : rec.warnings) log << "warning: " << w << '\n';

    try {
      o.fit = fit_rate(rec.rows, kSidecarTail);
    } catch (const Error&) {
    }
    if (p.bounds) o.predicted = predicted_rate(p.config.method, *p.bounds, p.config.dt, p.config.gamma);
    o.code = exit_code(rec.status);

    const fs::path dir(spec.out_dir);
    fs::create_directories(dir);
    {
      std::ofstream csv(dir / (o.stem + ".csv"), std::ios::binary);
      if (!csv) throw Error(ErrorKind::InvalidArgument, "cannot write to " + spec.out_dir);
      write_csv(csv, rec.rows);
    }
    const auto& c = p.config;
    json side = {
        {"problem", spec.problem},
        {"params", params_json(spec.params)},
        {"problem_parameters", p.problem.parameters},
        {"manifold", p.problem.manifold->describe()},
        {"method", to_string(c.method)},
        {"eig", to_string(c.eig_mode)},
        {"reflector_update", update_name(c.reflector_update)},
        {"dt", c.dt},
        {"gamma", c.gamma},
        {"k", c.k},
        {"max_iters", c.max_iters},
        {"grad_tol", c.grad_tol},
        {"seed", c.seed},
        {"init", p.init},
        {"auto_hb", spec.auto_hb},
        {"track_projector", c.track_projector_error},
        {"threshold", spec.threshold},
        {"error_metric", to_string(c.error_metric)},
        {"status", to_string(rec.status)},
        {"message", rec.message},
        {"iterations", rec.rows.empty() ? 0 : rec.rows.back().n},
        {"final_error", rec.rows.empty() ? json(nullptr) : json(rec.rows.back().error)},
        {"final_grad_norm", rec.rows.empty() ? json(nullptr) : json(rec.rows.back().grad_norm)},
        {"estimated_rate", o.fit ? json(o.fit->rate) : json(nullptr)},
        {"r_squared", o.fit ? json(o.fit->r_squared) : json(nullptr)},
        {"rate_tail_fraction", kSidecarTail},
        {"predicted_rate", optional_number(o.predicted)},
        {"spectral_bounds", p.bounds ? json{{"mu", p.bounds->mu}, {"L", p.bounds->L}} : json(nullptr)},
        {"warnings", rec.warnings},
        {"csv", o.stem + ".csv"},
    };
    if (spec.dump && p.problem.name == "bec" && rec.final_state) {
      const auto& wcs = dynamic_cast<const WeightedComplexSphere&>(*p.problem.manifold);
      write_grid_dump(*spec.dump, wcs.grid(), rec.final_state->x.coords);
      side["dump"] = *spec.dump;
    }
    std::ofstream(dir / (o.stem + ".json"), std::ios::binary) << side.dump(2) << '\n';

    log << o.stem << ": " << to_string(rec.status);
    if (!rec.rows.empty()) log << " after " << rec.rows.back().n << " iterations, error " << num(rec.rows.back().error);
    if (o.fit) log << ", estimated rate " << num(o.fit->rate);
    if (o.predicted) log << ", predicted " << num(*o.predicted);
    if (!rec.message.empty()) log << " (" << rec.message << ")";
    log << '\n';
    o.record = std::move(rec);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    o.code = kConfigError;
  }
  o.log = log.str();
  return o;
}

ExperimentSpec spec_from_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed sidecar: ") + e.what());
  }
  ExperimentSpec s;
  try {
    s.problem = j.at("problem").get<std::string>();
    s.params = params_from(j.at("params"));
    s.config.method = parse_method(j.at("method").get<std::string>());
    s.config.eig_mode = parse_eig(j.at("eig").get<std::string>());
    s.config.reflector_update = parse_update(j.at("reflector_update").get<std::string>());
    s.config.dt = j.at("dt").get<double>();
    s.gammas = {j.at("gamma").get<double>()};
    s.config.k = j.at("k").get<int>();
    s.config.max_iters = j.at("max_iters").get<int>();
    s.config.grad_tol = j.at("grad_tol").get<double>();
    s.config.seed = j.at("seed").get<std::uint64_t>();
    s.config.track_projector_error = j.at("track_projector").get<bool>();
    s.init = j.at("init").get<std::string>();
    s.auto_hb = j.at("auto_hb").get<bool>();
    s.threshold = j.at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("incomplete sidecar: ") + e.what());
  }
  s.out_dir = fs::path(path).parent_path().string();
  if (s.out_dir.empty()) s.out_dir = ".";
  return s;
}

}  // namespace

int exit_code(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return kOk;
    case RunStatus::MaxIters: return kMaxIters;
    default: return kFailed;
  }
}

void write_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << kHeader << '\n';
  for (const auto& r : rows) {
    out << r.n << ',' << num(r.error) << ',' << num(r.grad_norm) << ',' << num(r.energy) << ','
        << num(r.constraint_violation) << ',' << num(r.wall_time_s) << '\n';
  }
}

std::vector<RunRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidArgument, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw Error(ErrorKind::InvalidArgument, "unexpected CSV header '" + line + "'");
  std::vector<RunRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(lineno) + ": expected 6 fields");
    double v[6];
    for (int i = 0; i < 6; ++i) {
      char* end = nullptr;
      v[i] = std::strtod(cells[i].c_str(), &end);
      if (cells[i].empty() || *end != '\0') {
        throw Error(ErrorKind::InvalidArgument, "line " + std::to_string(lineno) + ": bad number '" + cells[i] + "'");
      }
    }
    RunRow r;
    r.n = static_cast<int>(v[0]);
    r.error = v[1];
    r.grad_norm = v[2];
    r.energy = v[3];
    r.constraint_violation = v[4];
    r.wall_time_s = v[5];
    rows.push_back(r);
  }
  return rows;
}

std::string run_stem(const ExperimentSpec& spec, Method method, double gamma) {
  return spec.problem + '_' + to_string(method) + "_g" + num(gamma);
}

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  if (spec.gammas.size() != 1) {
    err << "error: run takes exactly one --gamma; use sweep for several\n";
    return kConfigError;
  }
  const Outcome o = run_one(spec, spec.config.method, spec.gammas.front());
  (o.code == kConfigError ? err : out) << o.log;
  return o.code;
}

int cmd_sweep(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  if (spec.gammas.size() < 2) {
    err << "error: sweep needs at least two --gamma values\n";
    return kConfigError;
  }
  std::vector<Outcome> outcomes(spec.gammas.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < spec.gammas.size(); ++i) {
      workers.emplace_back([&, i] {
        const double g = spec.gammas[i];
        outcomes[i] = run_one(spec, g == 0.0 ? spec.config.method : Method::MCSD, g);
      });
    }
  }
  int worst = kOk;
  std::ostringstream summary;
  summary << "gamma,method,status,iterations_to_threshold,estimated_rate,final_error\n";
  for (const auto& o : outcomes) {
    (o.code == kConfigError ? err : out) << o.log;
    worst = std::max(worst, o.code == kConfigError ? kFailed + 1 : o.code);
    summary << num(o.gamma) << ',' << to_string(o.method) << ',';
    if (!o.record) {
      summary << "ConfigError,,,\n";
      continue;
    }
    const auto hit = o.record->iterations_to(spec.threshold);
    summary << to_string(o.record->status) << ',' << (hit ? std::to_string(*hit) : "") << ','
            << (o.fit ? num(o.fit->rate) : "") << ','
            << (o.record->rows.empty() ? "" : num(o.record->rows.back().error)) << '\n';
  }
  try {
    fs::create_directories(spec.out_dir);
    std::ofstream(fs::path(spec.out_dir) / (spec.problem + "_summary.csv"), std::ios::binary) << summary.str();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  out << summary.str();
  return worst > kFailed ? kConfigError : worst;
}

int cmd_rate(const std::string& csv_path, double tail_fraction, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(csv_path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + csv_path);
    const auto rows = read_csv(in);
    if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "CSV has no data rows");
    const RateFit fit = fit_rate(rows, tail_fraction);
    out << "estimated_rate " << num(fit.rate) << '\n';
    out << "r_squared " << num(fit.r_squared) << '\n';
    out << "rows_used " << fit.rows_used << '\n';

    const fs::path side = fs::path(csv_path).replace_extension(".json");
    if (fs::exists(side)) {
      std::ifstream sin(side);
      const json j = json::parse(sin, nullptr, false);
      if (!j.is_discarded() && j.contains("predicted_rate") && j["predicted_rate"].is_number()) {
        const double pred = j["predicted_rate"].get<double>();
        out << "predicted_rate " << num(pred) << '\n';
        out << "ratio " << num(fit.rate / pred) << '\n';
      }
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Saddle search on constrained manifolds with (momentum) saddle dynamics"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  spec.config.k = -1;
  spec.config.grad_tol = 0.0;
  std::string method = "csd", eig = "exact", update = "lowrank", config_path, dump_path, csv_path;
  std::vector<double> gammas;
  double mu = 1.0, L = 100.0, tail = 0.5;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--problem", spec.problem, "sphere|cylinder|thomson|rayleigh|bec|quadratic");
    sub->add_option("--a", spec.params.a, "sphere polynomial coefficient");
    sub->add_option("--M", spec.params.M, "Thomson particle count");
    sub->add_option("--exponent", spec.params.exponent, "Thomson pair exponent");
    sub->add_option("--n", spec.params.n, "Rayleigh matrix size");
    sub->add_option("--p", spec.params.p, "Rayleigh column count");
    sub->add_option("--grid-n", spec.params.grid_n, "BEC nodes per dimension, boundary included");
    sub->add_option("--half-width", spec.params.half_width, "BEC domain half-width");
    sub->add_option("--beta", spec.params.beta, "BEC interaction strength");
    sub->add_option("--mu", mu, "quadratic: smallest |eigenvalue| (negative direction)");
    sub->add_option("--L", L, "quadratic: largest eigenvalue");
    sub->add_option("--method", method, "csd|mcsd");
    sub->add_option("--eig", eig, "exact|euler");
    sub->add_option("--reflector-update", update, "lowrank|dense");
    sub->add_option("--dt", spec.config.dt, "step size");
    sub->add_option("--gamma", gammas, "momentum parameter (repeatable)");
    sub->add_option("--k", spec.config.k, "saddle index");
    sub->add_option("--max-iters", spec.config.max_iters);
    sub->add_option("--grad-tol", spec.config.grad_tol);
    sub->add_option("--seed", spec.config.seed);
    sub->add_option("--init", spec.init, "initial condition descriptor");
    sub->add_option("--out", spec.out_dir, "output directory");
    sub->add_option("--threshold", spec.threshold, "error level for iterations-to-threshold");
    sub->add_option("--dump", dump_path, "BEC: write the final field as a grid dump");
    sub->add_flag("--auto-hb", spec.auto_hb, "optimal heavy-ball dt and gamma from the spectrum at x*");
    sub->add_flag("--track-projector", spec.config.track_projector_error, "record the projector error (euler mode)");
  };
  auto* run_cmd = app.add_subcommand("run", "single run");
  add_common(run_cmd);
  run_cmd->add_option("--config", config_path, "re-run from a metadata sidecar");
  auto* sweep_cmd = app.add_subcommand("sweep", "one run per gamma, concurrently");
  add_common(sweep_cmd);
  auto* rate_cmd = app.add_subcommand("rate", "estimate the convergence rate of a CSV record");
  rate_cmd->add_option("csv", csv_path)->required();
  rate_cmd->add_option("--tail", tail, "tail fraction used for the fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  if (rate_cmd->parsed()) return cmd_rate(csv_path, tail, out, err);

  try {
    if (run_cmd->parsed() && !config_path.empty()) {
      const std::string out_override = run_cmd->count("--out") ? spec.out_dir : "";
      spec = spec_from_sidecar(config_path);
      if (!out_override.empty()) spec.out_dir = out_override;
      return cmd_run(spec, out, err);
    }
    spec.config.method = parse_method(method);
    spec.config.eig_mode = parse_eig(eig);
    spec.config.reflector_update = parse_update(update);
    if (!gammas.empty()) spec.gammas = gammas;
    if (spec.problem == "quadratic") spec.params.diag = {-mu, L};
    if (!dump_path.empty()) spec.dump = dump_path;
    const auto& names = problem_names();
    if (std::find(names.begin(), names.end(), spec.problem) == names.end()) {
      throw Error(ErrorKind::InvalidArgument, "unknown problem '" + spec.problem + "'");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return run_cmd->parsed() ? cmd_run(spec, out, err) : cmd_sweep(spec, out, err);
}

}  // namespace msd::cli
