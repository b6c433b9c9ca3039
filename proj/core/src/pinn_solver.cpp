#include "ehjb/pinn_solver.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "ehjb/csv.hpp"

namespace ehjb {

void TrainConfig::validate() const {
  if (!(alpha_res >= 0.0) || !(alpha_bnd >= 0.0)) throw ConfigError("loss weights must be non-negative");
  if (n_interior < 1 || n_boundary < 1) throw ConfigError("collocation counts must be positive");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
  if (!(learning_rate > 0.0) || !(final_learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(lion_beta1 > 0.0 && lion_beta1 < 1.0) || !(lion_beta2 > 0.0 && lion_beta2 < 1.0))
    throw ConfigError("LION betas must lie in (0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
  if (log_every < 1) throw ConfigError("log_every must be positive");
  if (hidden_width < 1 || hidden_layers < 1) throw ConfigError("network shape must be positive");
  if (chunk_size < 1) throw ConfigError("chunk_size must be positive");
}

TrainConfig train_preset(const std::string& name) {
  TrainConfig c;
  if (name == "ci") {
    c.iterations = 5000;
    c.n_interior = 2048;
    c.hidden_width = 32;
    c.hidden_layers = 5;
  } else if (name == "paper") {
    c.iterations = 20000;
    c.n_interior = 16384;
    c.hidden_width = 64;
    c.hidden_layers = 5;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected ci or paper)");
  }
  return c;
}

std::vector<int> network_sizes(int dim, const TrainConfig& config) {
  std::vector<int> sizes{dim};
  for (int i = 0; i < config.hidden_layers; ++i) sizes.push_back(config.hidden_width);
  sizes.push_back(1);
  return sizes;
}

Points sample_interior(const Box& domain, int n, Rng& rng) {
  domain.validate();
  if (n < 1) throw ConfigError("sample count must be positive");
  Points pts(domain.dim(), n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < domain.dim(); ++i) pts(i, j) = uniform_open(rng, domain.lower[i], domain.upper[i]);
  return pts;
}

BoundaryBatch sample_boundary(const Box& domain, int n, Rng& rng) {
  domain.validate();
  if (n < 1) throw ConfigError("sample count must be positive");
  const int d = domain.dim();
  // Face (axis i, either side) has measure prod_{j != i} w_j.
  std::vector<double> cumulative;
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    double m = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) m *= domain.width(j);
    total += 2.0 * m;
    cumulative.push_back(total);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  BoundaryBatch batch{Points(d, n), Points::Zero(d, n)};
  for (int k = 0; k < n; ++k) {
    const double u = unit(rng) * total;
    int axis = 0;
    while (axis + 1 < d && u >= cumulative[axis]) ++axis;
    const double face_lo = axis == 0 ? 0.0 : cumulative[axis - 1];
    const bool upper = u - face_lo >= 0.5 * (cumulative[axis] - face_lo);
    for (int i = 0; i < d; ++i)
      batch.points(i, k) = i == axis ? (upper ? domain.upper[i] : domain.lower[i])
                                     : uniform_open(rng, domain.lower[i], domain.upper[i]);
    batch.normals(axis, k) = upper ? 1.0 : -1.0;
  }
  return batch;
}

namespace {

std::vector<double> column(const Points& pts, Eigen::Index j) {
  return std::vector<double>(pts.col(j).data(), pts.col(j).data() + pts.rows());
}

// Records the interior residuals of points [begin, begin+n) on the tape with
// adjoint weight*2R and returns sum R^2.
double record_interior(const MlpParams& params, const Problem& problem, const Points& interior, Eigen::Index begin,
                       Eigen::Index n, double weight, Tape& tape) {
  const auto pts = interior.middleCols(begin, n);
  const BatchJet jet = forward_jet_batch(params, pts, HessianMode::Diagonal, &tape);
  const JetLayout& layout = jet.layout;
  const int d = layout.dim();
  Eigen::MatrixXd adjoint = Eigen::MatrixXd::Zero(n, layout.channels());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec x = pts.col(i);
    const double source = problem.source_at(x);
    double drift_dot = 0.0;
    Vec drift;
    if (problem.transport) {
      drift = problem.objective.gradient(x);
      for (int k = 0; k < d; ++k) drift_dot += jet.channels(i, layout.grad_channel(k)) * drift[k];
    }
    const double lap = jet.laplacian(static_cast<int>(i));
    const double r = residual_from_terms(jet.value(static_cast<int>(i)), drift_dot, lap, source, problem);
    if (!std::isfinite(r)) throw NumericalError("non-finite PDE residual", column(interior, begin + i));
    sum += r * r;
    const double a = 2.0 * weight * r;
    adjoint(i, 0) = -problem.rho * a;
    if (problem.transport)
      for (int k = 0; k < d; ++k) adjoint(i, layout.grad_channel(k)) = -drift[k] * a;
    const double slope = log_partition_slope(lap, problem.lambda, problem.control);
    for (int k = 0; k < d; ++k) adjoint(i, layout.diag_channel(k)) = slope * a;
  }
  tape.set_output_adjoint(tape.num_segments() - 1, std::move(adjoint));
  return sum;
}

double record_boundary(const MlpParams& params, const BoundaryBatch& boundary, Eigen::Index begin, Eigen::Index n,
                       double weight, Tape& tape) {
  const auto pts = boundary.points.middleCols(begin, n);
  const BatchJet jet = forward_jet_batch(params, pts, HessianMode::None, &tape);
  const int d = jet.layout.dim();
  Eigen::MatrixXd adjoint = Eigen::MatrixXd::Zero(n, jet.layout.channels());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double b = 0.0;
    for (int k = 0; k < d; ++k) b += jet.channels(i, jet.layout.grad_channel(k)) * boundary.normals(k, begin + i);
    if (!std::isfinite(b)) throw NumericalError("non-finite boundary residual", column(boundary.points, begin + i));
    sum += b * b;
    for (int k = 0; k < d; ++k)
      adjoint(i, jet.layout.grad_channel(k)) = 2.0 * weight * b * boundary.normals(k, begin + i);
  }
  tape.set_output_adjoint(tape.num_segments() - 1, std::move(adjoint));
  return sum;
}

struct Chunk {
  bool interior;
  Eigen::Index begin;
  Eigen::Index size;
};

std::vector<Chunk> make_chunks(Eigen::Index n_interior, Eigen::Index n_boundary, int chunk_size) {
  std::vector<Chunk> chunks;
  for (Eigen::Index b = 0; b < n_interior; b += chunk_size)
    chunks.push_back({true, b, std::min<Eigen::Index>(chunk_size, n_interior - b)});
  for (Eigen::Index b = 0; b < n_boundary; b += chunk_size)
    chunks.push_back({false, b, std::min<Eigen::Index>(chunk_size, n_boundary - b)});
  return chunks;
}

void check_batches(const Problem& problem, const Points& interior, const BoundaryBatch& boundary) {
  if (interior.cols() < 1 || boundary.size() < 1) throw ContractError("loss needs non-empty batches");
  if (interior.rows() != problem.dim() || boundary.points.rows() != problem.dim() ||
      boundary.normals.rows() != problem.dim() || boundary.normals.cols() != boundary.points.cols())
    throw ContractError("batch dimension does not match problem");
}

}  // namespace

LossTerms loss(const MlpParams& params, const Problem& problem, const Points& interior,
               const BoundaryBatch& boundary, const TrainConfig& config, Tape& tape) {
  check_batches(problem, interior, boundary);
  tape.clear();
  const double n_in = static_cast<double>(interior.cols());
  const double n_bd = static_cast<double>(boundary.size());
  double pde = 0.0, bnd = 0.0;
  for (const Chunk& c : make_chunks(interior.cols(), boundary.size(), config.chunk_size)) {
    if (c.interior)
      pde += record_interior(params, problem, interior, c.begin, c.size, config.alpha_res / n_in, tape);
    else
      bnd += record_boundary(params, boundary, c.begin, c.size, config.alpha_bnd / n_bd, tape);
  }
  LossTerms t{0.0, pde / n_in, bnd / n_bd};
  t.total = config.alpha_res * t.pde + config.alpha_bnd * t.bnd;
  tape.terminate(t.total);
  return t;
}

LossGradient loss_and_gradient(const MlpParams& params, const Problem& problem, const Points& interior,
                               const BoundaryBatch& boundary, const TrainConfig& config) {
  check_batches(problem, interior, boundary);
  const double n_in = static_cast<double>(interior.cols());
  const double n_bd = static_cast<double>(boundary.size());
  const auto chunks = make_chunks(interior.cols(), boundary.size(), config.chunk_size);
  std::vector<double> sums(chunks.size());
  std::vector<ParamGrad> grads(chunks.size());
  parallel_for(static_cast<int>(chunks.size()), config.workers, [&](int k) {
    const Chunk& c = chunks[k];
    Tape tape;
    sums[k] = c.interior ? record_interior(params, problem, interior, c.begin, c.size, config.alpha_res / n_in, tape)
                         : record_boundary(params, boundary, c.begin, c.size, config.alpha_bnd / n_bd, tape);
    tape.terminate(sums[k]);
    grads[k] = backward(tape);
  });
  LossGradient out{LossTerms{}, ParamGrad::zeros_like(params)};
  double pde = 0.0, bnd = 0.0;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    (chunks[k].interior ? pde : bnd) += sums[k];
    out.gradient += grads[k];
  }
  out.terms.pde = pde / n_in;
  out.terms.bnd = bnd / n_bd;
  out.terms.total = config.alpha_res * out.terms.pde + config.alpha_bnd * out.terms.bnd;
  return out;
}

namespace {

template <typename Derived>
void lion_update(Eigen::DenseBase<Derived>& p, const Eigen::DenseBase<Derived>& g, Eigen::DenseBase<Derived>& m,
                 double lr, const TrainConfig& c) {
  const auto interp = (c.lion_beta1 * m.derived().array() + (1.0 - c.lion_beta1) * g.derived().array()).eval();
  p.derived().array() -= lr * (interp.sign() + c.weight_decay * p.derived().array());
  m.derived().array() = c.lion_beta2 * m.derived().array() + (1.0 - c.lion_beta2) * g.derived().array();
}

}  // namespace

void lion_step(MlpParams& params, const ParamGrad& grads, ParamGrad& momentum, double lr, const TrainConfig& config) {
  if (!grads.same_shape(params) || !momentum.same_shape(params))
    throw ContractError("gradient/momentum shape does not match parameters");
  for (int l = 0; l < params.num_layers(); ++l) {
    lion_update(params.weights[l], grads.weights[l], momentum.weights[l], lr, config);
    lion_update(params.biases[l], grads.biases[l], momentum.biases[l], lr, config);
  }
}

double learning_rate_at(const TrainConfig& config, int iteration) {
  if (config.schedule == LrSchedule::Constant || config.iterations <= 1) return config.learning_rate;
  const double progress = static_cast<double>(iteration) / (config.iterations - 1);
  return config.final_learning_rate +
         0.5 * (config.learning_rate - config.final_learning_rate) * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string TrainLog::to_csv() const {
  std::string out = "iter,loss_total,loss_pde,loss_bnd,lr,seconds\n";
  for (const auto& r : rows)
    out += csv_line({format_number(static_cast<std::int64_t>(r.iter)), format_number(r.loss_total),
                     format_number(r.loss_pde), format_number(r.loss_bnd), format_number(r.lr),
                     format_number(r.seconds)});
  return out;
}

TrainResult train(const Problem& problem, MlpParams net, const TrainConfig& config, const TrainCallback& on_log) {
  problem.validate();
  config.validate();
  net.validate();
  if (net.input_dim() != problem.dim()) throw ConfigError("network input size does not match problem dimension");

  TrainResult result{std::move(net), {}};
  ParamGrad momentum = ParamGrad::zeros_like(result.params);
  const auto start = std::chrono::steady_clock::now();
  for (int t = 0; t < config.iterations; ++t) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(t)));
    const Points interior = sample_interior(problem.domain, config.n_interior, rng);
    const BoundaryBatch boundary = sample_boundary(problem.domain, config.n_boundary, rng);
    const LossGradient lg = loss_and_gradient(result.params, problem, interior, boundary, config);
    const double lr = learning_rate_at(config, t);
    if (!std::isfinite(lg.terms.total))
      throw NumericalError("non-finite loss at iteration " + std::to_string(t) + " (pde " +
                           format_number(lg.terms.pde) + ", bnd " + format_number(lg.terms.bnd) + ")");
    if (t % config.log_every == 0 || t + 1 == config.iterations) {
      TrainLogRow row{t, lg.terms.total, lg.terms.pde, lg.terms.bnd, lr, 0.0};
      if (config.record_time)
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.log.rows.push_back(row);
      if (on_log) on_log(row);
    }
    lion_step(result.params, lg.gradient, momentum, lr, config);
  }
  return result;
}

}  // namespace ehjb
