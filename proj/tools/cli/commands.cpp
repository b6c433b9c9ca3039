#include "commands.hpp"

#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "ehjb/checkpoint.hpp"
#include "ehjb/csv.hpp"

namespace ehjb::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kKappaStream = 0x4B41'5050'4100'0000ULL;

std::string resolved_section(const ResolvedControl& rc, std::optional<double> tau) {
  std::string s = "\n[resolved]\n";
  s += "kappa = " + (rc.kappa ? format_number(*rc.kappa) : std::string("null")) + "\n";
  s += "u_min = " + format_number(rc.control.u_min) + "\n";
  s += "u_max = " + format_number(rc.control.u_max) + "\n";
  if (tau) s += "tau = " + format_number(*tau) + "\n";
  return s;
}

std::string value_label(const nlohmann::json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  for (char& ch : s)
    if (ch == '/' || ch == ' ' || ch == '"') ch = '_';
  return s;
}

}  // namespace

ResolvedControl resolve_control(const ExperimentConfig& config, const Benchmark& benchmark) {
  ResolvedControl rc;
  rc.control.u_min = config.u_min;
  if (config.u_max) {
    rc.control.u_max = *config.u_max;
  } else {
    Rng rng(stream_seed(config.kappa_seed, kKappaStream));
    rc.kappa = estimate_kappa(benchmark.objective.gradient, benchmark.domain, config.kappa_samples, rng);
    rc.control.u_max = *config.c_kappa * *rc.kappa;
  }
  rc.control.validate();
  return rc;
}

double resolve_tau(const ExperimentConfig& config, const ControlSet& control) {
  if (config.tau_absolute) return *config.tau_absolute;
  return config.tau_fraction.value_or(0.0) * std::sqrt(2.0 * control.u_max);
}

SolveOutcome solve_ehjb(const ExperimentConfig& config, const fs::path& out) {
  const Benchmark bench = find_benchmark(config.benchmark);
  SolveOutcome o;
  o.control = resolve_control(config, bench);
  const Problem problem = make_problem(bench, config.rho, config.lambda, o.control.control);
  MlpParams net = init_network(config.net_seed, network_sizes(bench.dim(), config.train));
  TrainResult result = train(problem, std::move(net), config.train);
  o.params = std::move(result.params);
  o.log = std::move(result.log);

  fs::create_directories(out);
  write_file(out / "config.resolved", dump_config(config) + resolved_section(o.control, std::nullopt));
  save_checkpoint(o.params, out / "checkpoint");
  write_file(out / "train_log.csv", o.log.to_csv());
  if (bench.manufactured) {
    const ManufacturedCosine exact(bench.dim(), config.rho, o.control.control);
    o.report = laplacian_report(o.params, problem, [&](const Vec& x) { return exact.laplacian(x); }, config.n_test,
                                config.test_seed);
    write_file(out / "errors.csv", ErrorReport::csv_header() + o.report->csv_row());
  }
  return o;
}

LangevinOutcome run_langevin(const ExperimentConfig& config, const MlpParams& params, const fs::path& out) {
  const Benchmark bench = find_benchmark(config.benchmark);
  if (bench.minimizers.empty())
    throw ConfigError("benchmark " + bench.name + " has no minimizer targets; run-langevin needs one");
  if (params.input_dim() != bench.dim())
    throw ConfigError("checkpoint input dimension " + std::to_string(params.input_dim()) +
                      " does not match benchmark dimension " + std::to_string(bench.dim()));
  LangevinOutcome o;
  o.control = resolve_control(config, bench);
  o.tau = resolve_tau(config, o.control.control);
  const Problem problem = make_problem(bench, config.rho, config.lambda, o.control.control);
  const NoiseField noise = network_noise(params, config.lambda, o.control.control, o.tau);
  const TrajectoryLog log = run_trajectories(problem, noise, config.langevin);
  o.stats = trajectory_stats(log, bench.minimizers);
  o.best_point = log.global_best_point();
  o.best_value = log.global_best_value();

  fs::create_directories(out);
  write_file(out / "config.resolved", dump_config(config) + resolved_section(o.control, o.tau));
  write_file(out / "trajectories.csv", o.stats.to_csv());
  if (config.dump_states) write_file(out / "trajectories.bin", encode_trajectories(log));
  return o;
}

HowardResult fd_reference(const ExperimentConfig& config, const fs::path& out) {
  const Benchmark bench = find_benchmark(config.benchmark);
  if (bench.dim() != 1) throw ConfigError("fd-reference supports one-dimensional benchmarks only");
  const ResolvedControl rc = resolve_control(config, bench);
  FdGrid grid{config.fd_x_left.value_or(bench.domain.lower[0]), config.fd_x_right.value_or(bench.domain.upper[0]),
              config.fd_points};
  grid.validate();
  const FdData data = FdData::sample(bench.objective, config.rho, grid);
  HowardResult r = howard_solve(data, grid, rc.control, config.fd_eps_u, config.fd_k_max);

  fs::create_directories(out);
  write_file(out / "config.resolved", dump_config(config) + resolved_section(rc, std::nullopt));
  write_file(out / "fd_reference.csv", r.to_csv(grid));
  return r;
}

void sweep(const RawConfig& base, const std::string& parameter, const std::vector<nlohmann::json>& values,
           const fs::path& out, std::ostream& log) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (parameter.empty()) throw ConfigError("sweep needs a parameter (section.key)");
  {
    RawConfig probe = base;
    set_dotted(probe, parameter, values.front());
  }
  const std::string section = parameter.substr(0, parameter.find('.'));
  const std::string key = parameter.substr(parameter.find('.') + 1);

  std::string summary =
      "index,parameter,value,loss_final,e_l2_rel,e_linf,residual_eps,kappa,u_max,tau,err_final,f_hat_final,best_f,"
      "fd_iterations,fd_converged\n";
  std::vector<ErrorReport> reports;

  // Langevin-only sweeps share one network.
  std::optional<MlpParams> shared;
  if (section == "langevin" && key != "checkpoint") {
    const ExperimentConfig cfg = resolve_config(base);
    if (!cfg.checkpoint.empty()) {
      shared = load_checkpoint(cfg.checkpoint);
    } else {
      log << "training shared network\n";
      shared = solve_ehjb(cfg, out / "shared").params;
    }
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    RawConfig raw = base;
    set_dotted(raw, parameter, values[i]);
    ExperimentConfig cfg = resolve_config(raw);
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu_", i);
    const fs::path dir = out / (prefix + key + "=" + value_label(values[i]));
    cfg.out_dir = dir.string();
    std::vector<std::string> row(15);
    row[0] = std::to_string(i);
    row[1] = parameter;
    row[2] = values[i].dump();
    for (auto& cell : row) {
      if (cell.find(',') != std::string::npos) cell = "\"" + cell + "\"";
    }
    log << "[" << i + 1 << "/" << values.size() << "] " << parameter << " = " << row[2] << "\n";

    if (section == "fd") {
      const HowardResult r = fd_reference(cfg, dir);
      row[13] = std::to_string(r.iterations);
      row[14] = r.converged ? "1" : "0";
    } else {
      const Benchmark bench = find_benchmark(cfg.benchmark);
      std::optional<MlpParams> net = shared;
      if (!net) {
        SolveOutcome s = solve_ehjb(cfg, dir);
        row[3] = format_number(s.log.rows.empty() ? 0.0 : s.log.rows.back().loss_total);
        if (s.report) {
          row[4] = format_number(s.report->e_l2_rel);
          row[5] = format_number(s.report->e_linf);
          row[6] = format_number(s.report->residual_eps);
          reports.push_back(*s.report);
        }
        if (s.control.kappa) row[7] = format_number(*s.control.kappa);
        row[8] = format_number(s.control.control.u_max);
        net = std::move(s.params);
      }
      if (!bench.minimizers.empty()) {
        const LangevinOutcome l = run_langevin(cfg, *net, dir);
        if (l.control.kappa) row[7] = format_number(*l.control.kappa);
        row[8] = format_number(l.control.control.u_max);
        row[9] = format_number(l.tau);
        row[10] = format_number(l.stats.err.back());
        row[11] = format_number(l.stats.f_hat.back());
        row[12] = format_number(l.best_value);
      }
    }
    summary += csv_line(row);
  }
  write_file(out / "summary.csv", summary);

  if (parameter == "problem.lambda" && reports.size() >= 2) {
    std::vector<double> l2, linf, eps;
    for (const auto& r : reports) {
      l2.push_back(r.e_l2_rel);
      linf.push_back(r.e_linf);
      eps.push_back(r.residual_eps);
    }
    const auto rl2 = ratio_table(l2), rlinf = ratio_table(linf), reps = ratio_table(eps);
    std::string ratios = "lambda,e_l2_ratio,e_linf_ratio,residual_ratio\n";
    for (std::size_t k = 0; k < rl2.size(); ++k)
      ratios += csv_line({format_number(reports[k + 1].lambda), format_number(rl2[k]), format_number(rlinf[k]),
                          format_number(reps[k])});
    write_file(out / "ratios.csv", ratios);
  }
}

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory (overrides output.dir)");
  cmd->add_option("--preset", o.preset, "Training preset")->check(CLI::IsMember({"paper", "ci"}));
  cmd->add_option("--seed", o.seed, "Seed for training and Langevin streams");
}

RawConfig load_with_overrides(const CommonOptions& o) {
  RawConfig raw = load_config_file(o.config_path);
  if (!o.preset.empty()) raw["train"]["preset"] = o.preset;
  if (o.seed) {
    raw["train"]["seed"] = *o.seed;
    raw["langevin"]["seed"] = *o.seed;
  }
  // Relative checkpoint paths are taken relative to the config file.
  if (raw.contains("langevin") && raw["langevin"].contains("checkpoint") && raw["langevin"]["checkpoint"].is_string()) {
    fs::path p = raw["langevin"]["checkpoint"].get<std::string>();
    if (!p.empty() && p.is_relative()) raw["langevin"]["checkpoint"] = (fs::path(o.config_path).parent_path() / p).string();
  }
  return raw;
}

fs::path output_dir(const CommonOptions& o, const ExperimentConfig& c) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (!c.out_dir.empty()) return c.out_dir;
  throw ConfigError("no output directory: pass --out or set output.dir");
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exploratory HJB solver and state-dependent Langevin minimizer"};
  app.require_subcommand(1);

  CommonOptions solve_opts, langevin_opts, fd_opts, sweep_opts;
  std::string checkpoint_path, sweep_param, sweep_values;
  auto* solve_cmd = app.add_subcommand("solve-ehjb", "Train the value network for one configuration");
  add_common(solve_cmd, solve_opts);
  auto* langevin_cmd = app.add_subcommand("run-langevin", "Run Langevin trajectories with a trained network");
  add_common(langevin_cmd, langevin_opts);
  langevin_cmd->add_option("--checkpoint", checkpoint_path, "Network checkpoint (default: langevin.checkpoint, then <out>/checkpoint)");
  auto* fd_cmd = app.add_subcommand("fd-reference", "Finite-difference / policy-iteration reference solution (1D)");
  add_common(fd_cmd, fd_opts);
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a run over values of one parameter");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--param", sweep_param, "Parameter as section.key (default: sweep.parameter)");
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values (default: sweep.values)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) {
      const ExperimentConfig cfg = resolve_config(load_with_overrides(solve_opts));
      const fs::path dir = output_dir(solve_opts, cfg);
      const SolveOutcome o = solve_ehjb(cfg, dir);
      const auto& last = o.log.rows.empty() ? TrainLogRow{} : o.log.rows.back();
      out << "trained " << cfg.benchmark << " lambda=" << format_number(cfg.lambda)
          << " final loss=" << format_number(last.loss_total) << "\n";
      if (o.report)
        out << "e_l2_rel=" << format_number(o.report->e_l2_rel) << " e_linf=" << format_number(o.report->e_linf)
            << " residual_eps=" << format_number(o.report->residual_eps) << "\n";
      out << "wrote " << dir.string() << "\n";
    } else if (*langevin_cmd) {
      const ExperimentConfig cfg = resolve_config(load_with_overrides(langevin_opts));
      const fs::path dir = output_dir(langevin_opts, cfg);
      fs::path ckpt = !checkpoint_path.empty() ? fs::path(checkpoint_path)
                      : !cfg.checkpoint.empty() ? fs::path(cfg.checkpoint)
                                                : dir / "checkpoint";
      if (!fs::exists(ckpt)) throw ConfigError("checkpoint not found: " + ckpt.string());
      const LangevinOutcome o = run_langevin(cfg, load_checkpoint(ckpt), dir);
      out << "u_max=" << format_number(o.control.control.u_max) << " tau=" << format_number(o.tau)
          << " final E=" << format_number(o.stats.err.back()) << " best f=" << format_number(o.best_value) << "\n";
      out << "wrote " << dir.string() << "\n";
    } else if (*fd_cmd) {
      const ExperimentConfig cfg = resolve_config(load_with_overrides(fd_opts));
      const fs::path dir = output_dir(fd_opts, cfg);
      const HowardResult r = fd_reference(cfg, dir);
      out << (r.converged ? "converged" : "NOT converged") << " after " << r.iterations << " policy iterations\n";
      out << "wrote " << dir.string() << "\n";
      if (!r.converged) {
        err << "error: policy iteration hit k_max without meeting eps_u\n";
        return 3;
      }
    } else if (*sweep_cmd) {
      const RawConfig raw = load_with_overrides(sweep_opts);
      const ExperimentConfig cfg = resolve_config(raw);
      const fs::path dir = output_dir(sweep_opts, cfg);
      const std::string param = sweep_param.empty() ? cfg.sweep_parameter : sweep_param;
      std::vector<nlohmann::json> values = cfg.sweep_values;
      if (sweep_cmd->count("--values")) {
        values.clear();
        std::string item;
        std::stringstream ss(sweep_values);
        while (std::getline(ss, item, ','))
          if (!item.empty()) values.push_back(parse_value(item));
      }
      sweep(raw, param, values, dir, out);
      out << "wrote " << (dir / "summary.csv").string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace ehjb::cli
