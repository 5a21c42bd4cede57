#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msd/dynamics.hpp"
#include "msd/problems.hpp"

namespace msd::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kMaxIters = 2, kFailed = 3 };

struct ExperimentSpec {
  std::string problem = "sphere";
  ProblemParams params;
  RunConfig config;
  std::vector<double> gammas = {0.0};
  std::string init;  // empty: the problem's default descriptor
  std::string out_dir = ".";
  bool auto_hb = false;
  double threshold = 1e-6;  // sweep summary: iterations to this error
  std::optional<std::string> dump;  // BEC: write the final field here
};

[[nodiscard]] int exit_code(RunStatus status);

/// `iter,error,grad_norm,energy,constraint_violation,wall_time_s`, shortest round-trip
/// decimal, LF.
void write_csv(std::ostream& out, const std::vector<RunRow>& rows);
/// Throws InvalidArgument on a malformed header or row.
[[nodiscard]] std::vector<RunRow> read_csv(std::istream& in);

/// Output stem for one run, e.g. "sphere_mcsd_g0.9".
[[nodiscard]] std::string run_stem(const ExperimentSpec& spec, Method method, double gamma);

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);
int cmd_rate(const std::string& csv_path, double tail_fraction, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; never throws.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace msd::cli
