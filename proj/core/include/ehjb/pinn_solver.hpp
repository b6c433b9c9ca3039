#ifndef EHJB_PINN_SOLVER_HPP
#define EHJB_PINN_SOLVER_HPP

#include <functional>
#include <string>
#include <vector>

#include "ehjb/diffnet.hpp"
#include "ehjb/ehjb_ops.hpp"

namespace ehjb {

enum class LrSchedule { Constant, Cosine };

struct TrainConfig {
  double alpha_res = 1.0;
  double alpha_bnd = 50.0;
  int n_interior = 2048;
  int n_boundary = 64;
  int iterations = 5000;
  double learning_rate = 3e-4;
  LrSchedule schedule = LrSchedule::Constant;
  double final_learning_rate = 3e-5;  // cosine schedule only
  double lion_beta1 = 0.9;
  double lion_beta2 = 0.99;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  int log_every = 100;
  // Network shape used when the caller builds a fresh network.
  int hidden_width = 32;
  int hidden_layers = 5;
  // Points per forward/backward chunk; gradients are reduced in chunk order.
  int chunk_size = 256;
  int workers = 1;
  // Record wall-clock seconds in the log (off keeps logs byte-reproducible).
  bool record_time = false;

  void validate() const;
};

/// Named presets "ci" and "paper". alpha_res is left at 1; callers set 1/rho.
TrainConfig train_preset(const std::string& name);

std::vector<int> network_sizes(int dim, const TrainConfig& config);

struct BoundaryBatch {
  Points points;   // d x n
  Points normals;  // d x n, each column +-e_i

  int size() const { return static_cast<int>(points.cols()); }
};

Points sample_interior(const Box& domain, int n, Rng& rng);
BoundaryBatch sample_boundary(const Box& domain, int n, Rng& rng);

struct LossTerms {
  double total = 0.0;
  double pde = 0.0;  // mean squared interior residual (unweighted)
  double bnd = 0.0;  // mean squared boundary residual (unweighted)
};

/// alpha_res * mean R^2 + alpha_bnd * mean B^2, recorded on `tape` (cleared
/// first) and terminated with the total so backward(tape) gives the gradient.
LossTerms loss(const MlpParams& params, const Problem& problem, const Points& interior,
               const BoundaryBatch& boundary, const TrainConfig& config, Tape& tape);

struct LossGradient {
  LossTerms terms;
  ParamGrad gradient;
};

/// Chunked loss and gradient; the result does not depend on config.workers.
LossGradient loss_and_gradient(const MlpParams& params, const Problem& problem, const Points& interior,
                               const BoundaryBatch& boundary, const TrainConfig& config);

void lion_step(MlpParams& params, const ParamGrad& grads, ParamGrad& momentum, double lr,
               const TrainConfig& config);

double learning_rate_at(const TrainConfig& config, int iteration);

struct TrainLogRow {
  int iter = 0;
  double loss_total = 0.0;
  double loss_pde = 0.0;
  double loss_bnd = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;

  /// Header iter,loss_total,loss_pde,loss_bnd,lr,seconds.
  std::string to_csv() const;
};

struct TrainResult {
  MlpParams params;
  TrainLog log;
};

using TrainCallback = std::function<void(const TrainLogRow&)>;

/// Algorithm: resample collocation points, evaluate the loss and its gradient,
/// take a LION step; repeated `iterations` times. Deterministic given seed.
TrainResult train(const Problem& problem, MlpParams net, const TrainConfig& config,
                  const TrainCallback& on_log = {});

}  // namespace ehjb

#endif  // EHJB_PINN_SOLVER_HPP
