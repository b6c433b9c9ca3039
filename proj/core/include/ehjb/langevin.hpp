#ifndef EHJB_LANGEVIN_HPP
#define EHJB_LANGEVIN_HPP

#include <functional>
#include <string>
#include <vector>

#include "ehjb/diffnet.hpp"
#include "ehjb/ehjb_ops.hpp"

namespace ehjb {

struct LangevinConfig {
  double step_size = 0.016;
  int horizon = 1000;
  double truncation = 0.0;  // absolute tau
  int n_traj = 100;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// kappa = 0.5 (max_l |grad f(x_l)|_inf)^2 over S uniform samples of the box.
double estimate_kappa(const std::function<Vec(const Vec&)>& grad_f, const Box& domain, int samples, Rng& rng);

/// h if h >= tau, else 0.
double truncated_noise(double h, double tau);

/// Coordinate-wise folding of x into the box.
Vec mirror(const Vec& x, const Box& domain);

/// State-dependent (already truncated) noise amplitude.
using NoiseField = std::function<double(const Vec&)>;

/// x - eta grad f(x) + sqrt(eta) noise(x) xi, mirrored into the box.
Vec em_step(const Vec& x, const std::function<Vec(const Vec&)>& grad_f, const NoiseField& noise,
            const LangevinConfig& config, const Vec& gaussian_draw, const Box& domain);

/// tau-truncated noise_coeff of the network Laplacian. Thread-safe.
NoiseField network_noise(const MlpParams& params, double lambda, const ControlSet& control, double tau);

struct TrajectoryLog {
  int n_traj = 0;
  int horizon = 0;
  int dim = 0;
  std::vector<double> states;      // [n_traj][horizon+1][dim]
  std::vector<double> objectives;  // [n_traj][horizon+1]
  std::vector<int> best_step;      // per trajectory argmin_k f
  int best_trajectory = 0;

  Eigen::Map<const Vec> state(int traj, int k) const;
  double objective(int traj, int k) const { return objectives[static_cast<std::size_t>(traj) * (horizon + 1) + k]; }
  double best_value(int traj) const { return objective(traj, best_step[traj]); }
  Vec best_point(int traj) const { return state(traj, best_step[traj]); }
  Vec global_best_point() const { return best_point(best_trajectory); }
  double global_best_value() const { return best_value(best_trajectory); }
};

/// N_traj independent mirrored Euler-Maruyama runs from uniform starts.
/// Trajectory j uses the stream stream_seed(seed, j) for its start and its
/// Gaussian draws, so the log does not depend on config.workers.
TrajectoryLog run_trajectories(const Problem& problem, const NoiseField& noise, const LangevinConfig& config);

/// Binary dump: magic "EHJBTRAJ", u64 n_traj, horizon, d, then the states as
/// little-endian f64 in [n_traj][horizon+1][d] order.
std::string encode_trajectories(const TrajectoryLog& log);

}  // namespace ehjb

#endif  // EHJB_LANGEVIN_HPP
