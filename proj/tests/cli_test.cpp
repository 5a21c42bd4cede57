#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "msd/cli.hpp"
#include "support.hpp"

using namespace msd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "msd");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("msd_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  [[nodiscard]] std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// CSV text with the trailing wall_time column removed.
std::string without_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  for (std::string line; std::getline(in, line);) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

double field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  for (std::string k; in >> k;) {
    double v;
    in >> v;
    if (k == key) return v;
  }
  FAIL("missing key " << key);
  return 0;
}

void write_series(const fs::path& p, int n, double rate) {
  std::ofstream out(p, std::ios::binary);
  std::vector<RunRow> rows;
  for (int i = 0; i < n; ++i) {
    RunRow r;
    r.n = i;
    r.error = std::pow(rate, i);
    rows.push_back(r);
  }
  cli::write_csv(out, rows);
}

}  // namespace

TEST_CASE("csv round trip") {
  std::vector<RunRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].n = i;
    rows[i].error = 0.1 / (i + 3);
    rows[i].grad_norm = 1e-300 * (i + 1);
    rows[i].energy = -1.0 / 3.0;
    rows[i].constraint_violation = 0;
    rows[i].wall_time_s = 1e-6 * i;
  }
  std::stringstream ss;
  cli::write_csv(ss, rows);
  CHECK(ss.str().rfind("iter,error,grad_norm,energy,constraint_violation,wall_time_s\n", 0) == 0);
  CHECK(ss.str().find('\r') == std::string::npos);
  const auto back = cli::read_csv(ss);
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back[i].n == rows[i].n);
    CHECK(back[i].error == rows[i].error);
    CHECK(back[i].grad_norm == rows[i].grad_norm);
    CHECK(back[i].energy == rows[i].energy);
  }
  std::istringstream bad("iter,error\n1,2\n");
  CHECK_THROWS_AS((void)cli::read_csv(bad), Error);
  std::istringstream junk("iter,error,grad_norm,energy,constraint_violation,wall_time_s\n1,2,x,4,5,6\n");
  CHECK_THROWS_AS((void)cli::read_csv(junk), Error);
}

TEST_CASE("exit codes") {
  CHECK(cli::exit_code(RunStatus::Converged) == 0);
  CHECK(cli::exit_code(RunStatus::MaxIters) == 2);
  CHECK(cli::exit_code(RunStatus::Diverged) == 3);
  CHECK(cli::exit_code(RunStatus::EigengapCollapse) == 3);

  TempDir dir("codes");
  CHECK(invoke({"run", "--problem", "torus", "--out", dir.str()}).code == 1);
  CHECK(invoke({"run", "--method", "newton", "--out", dir.str()}).code == 1);
  CHECK(invoke({"run", "--method", "csd", "--gamma", "0.5", "--out", dir.str()}).code == 1);
  CHECK(invoke({"run", "--init", "nowhere", "--out", dir.str()}).code == 1);
  CHECK(invoke({"run", "--dt", "abc"}).code == 1);
  CHECK(invoke({}).code == 1);
  const Result sweep1 = invoke({"sweep", "--gamma", "0.9", "--out", dir.str()});
  CHECK(sweep1.code == 1);
  CHECK(sweep1.err.find("error:") == 0);
  CHECK(invoke({"run", "--max-iters", "3", "--out", dir.str()}).code == 2);
  CHECK(invoke({"run", "--problem", "quadratic", "--dt", "5", "--out", dir.str()}).code == 3);
  CHECK(invoke({"run", "--help"}).code == 0);
}

TEST_CASE("run writes a record and a sidecar") {
  TempDir dir("run");
  const Result r = invoke({"run", "--problem", "sphere", "--a", "2", "--method", "csd", "--dt", "0.01", "--out", dir.str()});
  CHECK(r.code == 0);
  const auto csv = dir.path / "sphere_csd_g0.csv";
  const auto side = dir.path / "sphere_csd_g0.json";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(side));
  const std::string meta = slurp(side);
  for (const char* key : {"\"dt\"", "\"gamma\"", "\"seed\"", "\"status\": \"Converged\"", "\"estimated_rate\"",
                          "\"predicted_rate\"", "\"init\": \"near-saddle\""}) {
    CHECK(meta.find(key) != std::string::npos);
  }
  const Result rate = invoke({"rate", csv.string()});
  CHECK(rate.code == 0);
  CHECK(field(rate.out, "estimated_rate") < 1.0);
  CHECK(field(rate.out, "ratio") == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("identical specs give identical records") {
  TempDir a("det_a"), b("det_b");
  const std::vector<std::string> args = {"run", "--problem", "thomson", "--method", "mcsd", "--gamma", "0.9",
                                         "--dt", "0.001", "--eig", "euler", "--max-iters", "400", "--seed", "3"};
  auto with_out = [&](const TempDir& d) {
    auto v = args;
    v.insert(v.end(), {"--out", d.str()});
    return invoke(v);
  };
  CHECK(with_out(a).code == 2);
  CHECK(with_out(b).code == 2);
  const std::string ca = slurp(a.path / "thomson_mcsd_g0.9.csv");
  const std::string cb = slurp(b.path / "thomson_mcsd_g0.9.csv");
  CHECK(!ca.empty());
  CHECK(without_wall_time(ca) == without_wall_time(cb));
}

TEST_CASE("sidecar reproduces the run") {
  TempDir a("side_a"), b("side_b");
  CHECK(invoke({"run", "--problem", "rayleigh", "--n", "20", "--seed", "5", "--method", "mcsd", "--gamma", "0.5",
                "--k", "4", "--max-iters", "200", "--out", a.str()})
            .code == 2);
  const auto side = a.path / "rayleigh_mcsd_g0.5.json";
  REQUIRE(fs::exists(side));
  CHECK(invoke({"run", "--config", side.string(), "--out", b.str()}).code == 2);
  CHECK(without_wall_time(slurp(a.path / "rayleigh_mcsd_g0.5.csv")) ==
        without_wall_time(slurp(b.path / "rayleigh_mcsd_g0.5.csv")));
  CHECK(invoke({"run", "--config", (a.path / "missing.json").string()}).code == 1);
}

TEST_CASE("rate command") {
  TempDir dir("rate");
  write_series(dir.path / "half.csv", 60, 0.5);
  const Result r = invoke({"rate", (dir.path / "half.csv").string(), "--tail", "0.5"});
  CHECK(r.code == 0);
  CHECK(std::abs(field(r.out, "estimated_rate") - 0.5) <= 1e-6);

  std::ofstream(dir.path / "empty.csv").close();
  CHECK(invoke({"rate", (dir.path / "empty.csv").string()}).code == 1);
  std::ofstream(dir.path / "header.csv") << "iter,error,grad_norm,energy,constraint_violation,wall_time_s\n";
  CHECK(invoke({"rate", (dir.path / "header.csv").string()}).code == 1);
  std::ofstream(dir.path / "garbage.csv") << "hello\n";
  CHECK(invoke({"rate", (dir.path / "garbage.csv").string()}).code == 1);
  write_series(dir.path / "short.csv", 10, 0.5);
  CHECK(invoke({"rate", (dir.path / "short.csv").string()}).code == 1);
}

TEST_CASE("optimal heavy ball on the quadratic matches its prediction") {
  TempDir dir("hb");
  const Result r = invoke({"run", "--problem", "quadratic", "--mu", "1", "--L", "100", "--method", "mcsd", "--auto-hb",
                           "--init", "ones", "--grad-tol", "1e-12", "--out", dir.str()});
  CHECK(r.code == 0);
  fs::path csv;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    if (e.path().extension() == ".csv") csv = e.path();
  }
  REQUIRE(csv.filename().string().rfind("quadratic_mcsd_g0.669", 0) == 0);
  const Result rate = invoke({"rate", csv.string()});
  CHECK(field(rate.out, "predicted_rate") == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  const double ratio = field(rate.out, "ratio");
  CHECK(ratio >= 0.85);
  CHECK(ratio <= 1.15);
}

TEST_CASE("cylinder sweep favours moderate momentum") {
  TempDir dir("cyl");
  const Result r = invoke({"sweep", "--problem", "cylinder", "--dt", "0.01", "--gamma", "0", "--gamma", "0.5",
                           "--gamma", "0.9", "--gamma", "0.99", "--max-iters", "20000", "--out", dir.str()});
  CHECK(r.code == 0);
  std::istringstream in(slurp(dir.path / "cylinder_summary.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "gamma,method,status,iterations_to_threshold,estimated_rate,final_error");
  std::vector<int> hits;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() >= 4);
    CHECK(cells[2] == "Converged");
    hits.push_back(std::stoi(cells[3]));
  }
  REQUIRE(hits.size() == 4);
  CHECK(hits[2] < hits[0]);
  CHECK(hits[2] < hits[1]);
  CHECK(hits[2] < hits[3]);
  for (const char* stem : {"cylinder_csd_g0", "cylinder_mcsd_g0.5", "cylinder_mcsd_g0.9", "cylinder_mcsd_g0.99"}) {
    CHECK(fs::exists(dir.path / (std::string(stem) + ".csv")));
  }
}

TEST_CASE("thomson sweep: too much momentum slows convergence") {
  TempDir dir("thomson");
  const Result r = invoke({"sweep", "--problem", "thomson", "--dt", "0.001", "--gamma", "0.9", "--gamma", "0.99",
                           "--grad-tol", "1e-6", "--max-iters", "60000", "--out", dir.str()});
  CHECK(r.code == 0);
  std::istringstream in(slurp(dir.path / "thomson_summary.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<int> iters;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<std::string> cells;
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    iters.push_back(std::stoi(cells[3]));
  }
  REQUIRE(iters.size() == 2);
  CHECK(iters[0] < iters[1]);
}

TEST_CASE("bec run writes a grid dump") {
  TempDir dir("bec");
  const auto dump = (dir.path / "field.bin").string();
  const Result r = invoke({"run", "--problem", "bec", "--grid-n", "16", "--half-width", "4", "--beta", "30", "--init",
                           "ground", "--k", "1", "--eig", "euler", "--dt", "0.005", "--max-iters", "20", "--dump",
                           dump, "--out", dir.str()});
  CHECK(r.code == 2);
  REQUIRE(fs::exists(dump));
  CHECK(fs::file_size(dump) == 12 + 16 * 16 * 16);
  CHECK(slurp(dir.path / "bec_csd_g0.json").find("\"dump\"") != std::string::npos);
}
