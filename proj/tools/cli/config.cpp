#include "config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ehjb/csv.hpp"

namespace ehjb::cli {

namespace {

using nlohmann::json;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"problem", {"benchmark", "rho", "lambda", "u_min", "u_max", "c_kappa", "kappa_samples", "kappa_seed"}},
      {"train",
       {"preset", "alpha_res", "alpha_bnd", "n_interior", "n_boundary", "iterations", "learning_rate", "schedule",
        "final_learning_rate", "lion_beta1", "lion_beta2", "weight_decay", "seed", "log_every", "hidden_width",
        "hidden_layers", "chunk_size", "workers", "timing", "n_test", "test_seed"}},
      {"langevin", {"step_size", "horizon", "s", "tau", "n_traj", "seed", "workers", "checkpoint", "dump_states"}},
      {"fd", {"x_left", "x_right", "n_points", "eps_u", "k_max"}},
      {"output", {"dir"}},
      {"sweep", {"parameter", "values"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

// Typed accessors; all raise ConfigError naming the offending key.
struct Reader {
  const RawConfig& raw;

  const RawConfig* find(const char* section, const char* key) const {
    if (!raw.contains(section)) return nullptr;
    const auto& sec = raw.at(section);
    if (!sec.contains(key) || sec.at(key).is_null()) return nullptr;
    return &sec.at(key);
  }

  [[noreturn]] static void fail(const char* section, const char* key, const std::string& why) {
    throw ConfigError(std::string(section) + "." + key + ": " + why);
  }

  std::optional<double> number(const char* section, const char* key) const {
    const RawConfig* v = find(section, key);
    if (!v) return std::nullopt;
    if (!v->is_number()) fail(section, key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(section, key, "must be finite");
    return x;
  }

  template <typename Int>
  std::optional<Int> integer(const char* section, const char* key) const {
    const RawConfig* v = find(section, key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) fail(section, key, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v->is_number_unsigned()) return v->get<Int>();
      if (v->get<long long>() < 0) fail(section, key, "must be non-negative");
    }
    return v->get<Int>();
  }

  std::optional<std::string> string(const char* section, const char* key) const {
    const RawConfig* v = find(section, key);
    if (!v) return std::nullopt;
    if (!v->is_string()) fail(section, key, "expected a string");
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const char* section, const char* key) const {
    const RawConfig* v = find(section, key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) fail(section, key, "expected true or false");
    return v->get<bool>();
  }
};

template <typename T>
void assign(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

}  // namespace

json parse_value(const std::string& text) {
  const std::string t = trim(text);
  try {
    return json::parse(t);
  } catch (const json::parse_error&) {
    return json(t);
  }
}

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw = RawConfig::object();
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      if (!raw.contains(section)) raw[section] = RawConfig::object();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    if (!schema().at(section).count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + section + "." + key);
    raw[section][key] = parse_value(line.substr(eq + 1));
  }
  return raw;
}

RawConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void set_dotted(RawConfig& raw, const std::string& dotted, const json& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw ConfigError("parameter must look like section.key, got '" + dotted + "'");
  const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
  if (!schema().count(section) || !schema().at(section).count(key))
    throw ConfigError("unknown parameter '" + dotted + "'");
  raw[section][key] = value;
}

ExperimentConfig resolve_config(const RawConfig& raw) {
  const Reader r{raw};
  ExperimentConfig c;

  c.benchmark = r.string("problem", "benchmark").value_or("");
  if (c.benchmark.empty()) throw ConfigError("problem.benchmark is required");
  assign(c.rho, r.number("problem", "rho"));
  assign(c.lambda, r.number("problem", "lambda"));
  assign(c.u_min, r.number("problem", "u_min"));
  c.u_max = r.number("problem", "u_max");
  c.c_kappa = r.number("problem", "c_kappa");
  if (c.u_max && c.c_kappa) throw ConfigError("set only one of problem.u_max and problem.c_kappa");
  if (!c.u_max && !c.c_kappa) c.c_kappa = 4.0;
  if (c.c_kappa && !(*c.c_kappa > 0.0)) throw ConfigError("problem.c_kappa must be positive");
  assign(c.kappa_samples, r.integer<int>("problem", "kappa_samples"));
  assign(c.kappa_seed, r.integer<std::uint64_t>("problem", "kappa_seed"));
  if (!(c.rho > 0.0)) throw ConfigError("problem.rho must be positive");
  if (!(c.lambda > 0.0)) throw ConfigError("problem.lambda must be positive");
  if (!(c.u_min > 0.0)) throw ConfigError("problem.u_min must be positive");
  if (c.kappa_samples < 1) throw ConfigError("problem.kappa_samples must be positive");

  c.preset = r.string("train", "preset").value_or("ci");
  c.train = train_preset(c.preset);
  c.train.alpha_res = 1.0 / c.rho;
  assign(c.train.alpha_res, r.number("train", "alpha_res"));
  assign(c.train.alpha_bnd, r.number("train", "alpha_bnd"));
  assign(c.train.n_interior, r.integer<int>("train", "n_interior"));
  assign(c.train.n_boundary, r.integer<int>("train", "n_boundary"));
  assign(c.train.iterations, r.integer<int>("train", "iterations"));
  assign(c.train.learning_rate, r.number("train", "learning_rate"));
  if (const auto s = r.string("train", "schedule")) {
    if (*s == "constant") c.train.schedule = LrSchedule::Constant;
    else if (*s == "cosine") c.train.schedule = LrSchedule::Cosine;
    else throw ConfigError("train.schedule must be constant or cosine");
  }
  assign(c.train.final_learning_rate, r.number("train", "final_learning_rate"));
  assign(c.train.lion_beta1, r.number("train", "lion_beta1"));
  assign(c.train.lion_beta2, r.number("train", "lion_beta2"));
  assign(c.train.weight_decay, r.number("train", "weight_decay"));
  assign(c.train.seed, r.integer<std::uint64_t>("train", "seed"));
  assign(c.train.log_every, r.integer<int>("train", "log_every"));
  assign(c.train.hidden_width, r.integer<int>("train", "hidden_width"));
  assign(c.train.hidden_layers, r.integer<int>("train", "hidden_layers"));
  assign(c.train.chunk_size, r.integer<int>("train", "chunk_size"));
  assign(c.train.workers, r.integer<int>("train", "workers"));
  assign(c.train.record_time, r.boolean("train", "timing"));
  assign(c.n_test, r.integer<int>("train", "n_test"));
  assign(c.test_seed, r.integer<std::uint64_t>("train", "test_seed"));
  c.train.validate();
  c.net_seed = c.train.seed;
  if (c.n_test < 1) throw ConfigError("train.n_test must be positive");

  assign(c.langevin.step_size, r.number("langevin", "step_size"));
  assign(c.langevin.horizon, r.integer<int>("langevin", "horizon"));
  assign(c.langevin.n_traj, r.integer<int>("langevin", "n_traj"));
  assign(c.langevin.seed, r.integer<std::uint64_t>("langevin", "seed"));
  assign(c.langevin.workers, r.integer<int>("langevin", "workers"));
  c.tau_fraction = r.number("langevin", "s");
  c.tau_absolute = r.number("langevin", "tau");
  if (c.tau_fraction && c.tau_absolute) throw ConfigError("set only one of langevin.s and langevin.tau");
  if (c.tau_fraction && !(*c.tau_fraction >= 0.0 && *c.tau_fraction <= 1.0))
    throw ConfigError("langevin.s must lie in [0, 1]");
  if (c.tau_absolute && !(*c.tau_absolute >= 0.0)) throw ConfigError("langevin.tau must be non-negative");
  if (!c.tau_fraction && !c.tau_absolute) c.tau_fraction = 0.0;
  c.checkpoint = r.string("langevin", "checkpoint").value_or("");
  assign(c.dump_states, r.boolean("langevin", "dump_states"));
  c.langevin.validate();

  c.fd_x_left = r.number("fd", "x_left");
  c.fd_x_right = r.number("fd", "x_right");
  assign(c.fd_points, r.integer<int>("fd", "n_points"));
  assign(c.fd_eps_u, r.number("fd", "eps_u"));
  assign(c.fd_k_max, r.integer<int>("fd", "k_max"));
  if (c.fd_points < 4) throw ConfigError("fd.n_points must be at least 4 (two Neumann rows plus interior nodes)");
  if (!(c.fd_eps_u > 0.0) || c.fd_k_max < 1) throw ConfigError("fd.eps_u and fd.k_max must be positive");

  c.out_dir = r.string("output", "dir").value_or("");

  c.sweep_parameter = r.string("sweep", "parameter").value_or("");
  if (const RawConfig* v = r.find("sweep", "values")) {
    if (!v->is_array()) throw ConfigError("sweep.values must be a list");
    for (const auto& item : *v) c.sweep_values.push_back(nlohmann::json::parse(item.dump()));
  }
  return c;
}

namespace {

std::string line(const std::string& key, const json& value) {
  return key + " = " + value.dump() + "\n";
}

json opt(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string dump_config(const ExperimentConfig& c) {
  std::string out;
  out += "[problem]\n";
  out += line("benchmark", c.benchmark);
  out += line("rho", c.rho);
  out += line("lambda", c.lambda);
  out += line("u_min", c.u_min);
  out += line("u_max", opt(c.u_max));
  out += line("c_kappa", opt(c.c_kappa));
  out += line("kappa_samples", c.kappa_samples);
  out += line("kappa_seed", c.kappa_seed);
  out += "\n[train]\n";
  out += line("preset", c.preset);
  out += line("alpha_res", c.train.alpha_res);
  out += line("alpha_bnd", c.train.alpha_bnd);
  out += line("n_interior", c.train.n_interior);
  out += line("n_boundary", c.train.n_boundary);
  out += line("iterations", c.train.iterations);
  out += line("learning_rate", c.train.learning_rate);
  out += line("schedule", c.train.schedule == LrSchedule::Cosine ? "cosine" : "constant");
  out += line("final_learning_rate", c.train.final_learning_rate);
  out += line("lion_beta1", c.train.lion_beta1);
  out += line("lion_beta2", c.train.lion_beta2);
  out += line("weight_decay", c.train.weight_decay);
  out += line("seed", c.train.seed);
  out += line("log_every", c.train.log_every);
  out += line("hidden_width", c.train.hidden_width);
  out += line("hidden_layers", c.train.hidden_layers);
  out += line("chunk_size", c.train.chunk_size);
  out += line("workers", c.train.workers);
  out += line("timing", c.train.record_time);
  out += line("n_test", c.n_test);
  out += line("test_seed", c.test_seed);
  out += "\n[langevin]\n";
  out += line("step_size", c.langevin.step_size);
  out += line("horizon", c.langevin.horizon);
  out += line("s", opt(c.tau_fraction));
  out += line("tau", opt(c.tau_absolute));
  out += line("n_traj", c.langevin.n_traj);
  out += line("seed", c.langevin.seed);
  out += line("workers", c.langevin.workers);
  out += line("checkpoint", c.checkpoint);
  out += line("dump_states", c.dump_states);
  out += "\n[fd]\n";
  out += line("x_left", opt(c.fd_x_left));
  out += line("x_right", opt(c.fd_x_right));
  out += line("n_points", c.fd_points);
  out += line("eps_u", c.fd_eps_u);
  out += line("k_max", c.fd_k_max);
  out += "\n[output]\n";
  out += line("dir", c.out_dir);
  if (!c.sweep_parameter.empty()) {
    out += "\n[sweep]\n";
    out += line("parameter", c.sweep_parameter);
    out += line("values", json(c.sweep_values));
  }
  return out;
}

}  // namespace ehjb::cli
