#include "ehjb/langevin.hpp"

#include <cmath>

#include "ehjb/csv.hpp"

namespace ehjb {

void LangevinConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ConfigError("step_size must be positive");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(truncation >= 0.0)) throw ConfigError("truncation must be non-negative");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
}

double estimate_kappa(const std::function<Vec(const Vec&)>& grad_f, const Box& domain, int samples, Rng& rng) {
  domain.validate();
  if (samples < 1) throw ConfigError("kappa needs at least one sample");
  double max_norm = 0.0;
  Vec x(domain.dim());
  for (int l = 0; l < samples; ++l) {
    for (int i = 0; i < domain.dim(); ++i) x[i] = uniform_open(rng, domain.lower[i], domain.upper[i]);
    const Vec g = grad_f(x);
    if (!g.allFinite())
      throw NumericalError("non-finite gradient while estimating kappa", std::vector<double>(x.data(), x.data() + x.size()));
    max_norm = std::max(max_norm, g.lpNorm<Eigen::Infinity>());
  }
  return 0.5 * max_norm * max_norm;
}

double truncated_noise(double h, double tau) {
  return h >= tau ? h : 0.0;
}

Vec mirror(const Vec& x, const Box& domain) {
  if (x.size() != domain.dim()) throw ContractError("mirror: dimension mismatch");
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double a = domain.lower[i], b = domain.upper[i];
    if (x[i] >= a && x[i] <= b) {
      out[i] = x[i];
      continue;
    }
    const double w = b - a;
    const double z = (x[i] - a) / w;
    const double fl = std::floor(z);
    const double r = z - fl;
    const bool even = std::fmod(fl, 2.0) == 0.0;
    out[i] = std::clamp(even ? a + w * r : b - w * r, a, b);
  }
  return out;
}

Vec em_step(const Vec& x, const std::function<Vec(const Vec&)>& grad_f, const NoiseField& noise,
            const LangevinConfig& config, const Vec& gaussian_draw, const Box& domain) {
  const Vec g = grad_f(x);
  if (!g.allFinite())
    throw NumericalError("non-finite gradient in Langevin step", std::vector<double>(x.data(), x.data() + x.size()));
  const double h = noise ? noise(x) : 0.0;
  Vec next = x - config.step_size * g;
  if (h != 0.0) next += std::sqrt(config.step_size) * h * gaussian_draw;
  if (!next.allFinite())
    throw NumericalError("non-finite Langevin state", std::vector<double>(x.data(), x.data() + x.size()));
  return mirror(next, domain);
}

NoiseField network_noise(const MlpParams& params, double lambda, const ControlSet& control, double tau) {
  control.validate();
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  return [params, lambda, control, tau](const Vec& x) {
    const BatchJet jet = forward_jet_batch(params, x, HessianMode::Diagonal);
    return truncated_noise(noise_coeff(jet.laplacian(0), lambda, control), tau);
  };
}

Eigen::Map<const Vec> TrajectoryLog::state(int traj, int k) const {
  const std::size_t offset = (static_cast<std::size_t>(traj) * (horizon + 1) + k) * dim;
  return Eigen::Map<const Vec>(states.data() + offset, dim);
}

TrajectoryLog run_trajectories(const Problem& problem, const NoiseField& noise, const LangevinConfig& config) {
  config.validate();
  problem.domain.validate();
  if (!problem.objective.value || !problem.objective.gradient) throw ConfigError("objective and gradient required");
  const int d = problem.dim();
  const std::size_t steps = static_cast<std::size_t>(config.horizon) + 1;

  TrajectoryLog log;
  log.n_traj = config.n_traj;
  log.horizon = config.horizon;
  log.dim = d;
  log.states.resize(static_cast<std::size_t>(config.n_traj) * steps * d);
  log.objectives.resize(static_cast<std::size_t>(config.n_traj) * steps);
  log.best_step.assign(config.n_traj, 0);

  parallel_for(config.n_traj, config.workers, [&](int j) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(j)));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = uniform_open(rng, problem.domain.lower[i], problem.domain.upper[i]);
    Vec xi(d);
    double* states = log.states.data() + static_cast<std::size_t>(j) * steps * d;
    double* values = log.objectives.data() + static_cast<std::size_t>(j) * steps;
    for (std::size_t k = 0; k < steps; ++k) {
      if (k > 0) {
        for (int i = 0; i < d; ++i) xi[i] = normal(rng);
        x = em_step(x, problem.objective.gradient, noise, config, xi, problem.domain);
      }
      std::copy(x.data(), x.data() + d, states + k * d);
      values[k] = problem.objective.value(x);
      if (values[k] < values[log.best_step[j]]) log.best_step[j] = static_cast<int>(k);
    }
  });
  for (int j = 1; j < config.n_traj; ++j)
    if (log.best_value(j) < log.best_value(log.best_trajectory)) log.best_trajectory = j;
  return log;
}

std::string encode_trajectories(const TrajectoryLog& log) {
  std::string out = "EHJBTRAJ";
  append_u64_le(out, static_cast<std::uint64_t>(log.n_traj));
  append_u64_le(out, static_cast<std::uint64_t>(log.horizon));
  append_u64_le(out, static_cast<std::uint64_t>(log.dim));
  for (double v : log.states) append_f64_le(out, v);
  return out;
}

}  // namespace ehjb
