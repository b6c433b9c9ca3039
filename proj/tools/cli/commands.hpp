#ifndef EHJB_CLI_COMMANDS_HPP
#define EHJB_CLI_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "ehjb/fd_reference.hpp"
#include "ehjb/metrics.hpp"
#include "ehjb/objectives.hpp"

namespace ehjb::cli {

/// Control interval of a run: explicit u_max, or c_kappa * kappa with kappa
/// estimated from kappa_samples uniform gradient samples.
struct ResolvedControl {
  ControlSet control;
  std::optional<double> kappa;
};
ResolvedControl resolve_control(const ExperimentConfig& config, const Benchmark& benchmark);

double resolve_tau(const ExperimentConfig& config, const ControlSet& control);

struct SolveOutcome {
  MlpParams params;
  TrainLog log;
  ResolvedControl control;
  std::optional<ErrorReport> report;  // manufactured benchmarks only
};

struct LangevinOutcome {
  ResolvedControl control;
  double tau = 0.0;
  TrajectoryStats stats;
  Vec best_point;
  double best_value = 0.0;
};

/// Each command writes its artifacts into `out` (created if needed).
SolveOutcome solve_ehjb(const ExperimentConfig& config, const std::filesystem::path& out);
LangevinOutcome run_langevin(const ExperimentConfig& config, const MlpParams& params, const std::filesystem::path& out);
HowardResult fd_reference(const ExperimentConfig& config, const std::filesystem::path& out);

/// One run per value of `parameter` (section.key) under out/NN_<key>=<value>,
/// plus out/summary.csv and, for problem.lambda sweeps with error reports,
/// out/ratios.csv.
void sweep(const RawConfig& base, const std::string& parameter, const std::vector<nlohmann::json>& values,
           const std::filesystem::path& out, std::ostream& log);

/// Entry point used by main(); returns the process exit code
/// (0 ok, 2 usage or configuration error, 3 numerical failure).
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ehjb::cli

#endif  // EHJB_CLI_COMMANDS_HPP
