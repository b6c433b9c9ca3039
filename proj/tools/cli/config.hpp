#ifndef EHJB_CLI_CONFIG_HPP
#define EHJB_CLI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehjb/fd_reference.hpp"
#include "ehjb/langevin.hpp"
#include "ehjb/pinn_solver.hpp"

namespace ehjb::cli {

/// Raw configuration: section -> key -> JSON value. Parsed from
///
///   # comment
///   [problem]
///   benchmark = "double_well_1d"
///   lambda = 0.04
///
/// Values are JSON; a bare word that is not valid JSON is taken as a string.
using RawConfig = nlohmann::ordered_json;

RawConfig parse_config_text(const std::string& text);
RawConfig load_config_file(const std::string& path);

/// Sets "section.key" to a JSON value. Throws ConfigError for malformed names.
void set_dotted(RawConfig& raw, const std::string& dotted, const nlohmann::json& value);
/// Parses a command-line value as JSON, falling back to a string.
nlohmann::json parse_value(const std::string& text);

struct ExperimentConfig {
  // [problem]
  std::string benchmark;
  double rho = 1.0;
  double lambda = 0.1;
  double u_min = 0.2;
  std::optional<double> u_max;
  std::optional<double> c_kappa;
  int kappa_samples = 2000;
  std::uint64_t kappa_seed = 0;

  // [train]
  std::string preset = "ci";
  TrainConfig train;
  std::uint64_t net_seed = 0;
  int n_test = 4096;
  std::uint64_t test_seed = 12345;

  // [langevin]
  LangevinConfig langevin;
  std::optional<double> tau_fraction;  // s, tau = s sqrt(2 u_max)
  std::optional<double> tau_absolute;
  std::string checkpoint;
  bool dump_states = false;

  // [fd]
  std::optional<double> fd_x_left;
  std::optional<double> fd_x_right;
  int fd_points = 1001;
  double fd_eps_u = 1e-4;
  int fd_k_max = 2000;

  // [output]
  std::string out_dir;

  // [sweep]
  std::string sweep_parameter;
  std::vector<nlohmann::json> sweep_values;
};

/// Validates and types a raw config. Unknown sections or keys are rejected.
ExperimentConfig resolve_config(const RawConfig& raw);

/// Canonical text of a resolved config (every key, fixed order).
std::string dump_config(const ExperimentConfig& config);

}  // namespace ehjb::cli

#endif  // EHJB_CLI_CONFIG_HPP
