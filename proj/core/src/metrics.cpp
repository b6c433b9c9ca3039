#include "ehjb/metrics.hpp"

#include <cmath>
#include <limits>

#include "ehjb/csv.hpp"

namespace ehjb {

namespace {

void check_pair(const std::vector<double>& exact, const std::vector<double>& approx) {
  if (exact.size() != approx.size()) throw ContractError("metric inputs differ in length");
  if (exact.empty()) throw ContractError("metric inputs are empty");
}

// Stream index reserved for evaluation points, far from training iterations.
constexpr std::uint64_t kTestStream = 0xE7A1'0000'0000'0000ULL;

}  // namespace

std::string ErrorReport::csv_header() {
  return "lambda,e_l2_rel,e_linf,residual_eps,n_test,seed\n";
}

std::string ErrorReport::csv_row() const {
  return csv_line({format_number(lambda), format_number(e_l2_rel), format_number(e_linf), format_number(residual_eps),
                   format_number(static_cast<std::int64_t>(n_test)), std::to_string(seed)});
}

double rel_l2_error(const std::vector<double>& exact, const std::vector<double>& approx) {
  check_pair(exact, approx);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (exact[i] - approx[i]) * (exact[i] - approx[i]);
    den += exact[i] * exact[i];
  }
  if (den == 0.0) throw MetricError("relative l2 error with zero reference");
  return std::sqrt(num / den);
}

double linf_error(const std::vector<double>& exact, const std::vector<double>& approx) {
  check_pair(exact, approx);
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(exact[i] - approx[i]));
  return worst;
}

double residual_linf(const MlpParams& params, const Problem& problem, const Points& test_points) {
  if (test_points.cols() < 1) throw ContractError("residual needs test points");
  const BatchJet jet = forward_jet_batch(params, test_points, HessianMode::Diagonal);
  double worst = 0.0;
  for (int i = 0; i < jet.size(); ++i) {
    const Vec x = test_points.col(i);
    const double source = problem.source_at(x);
    const double drift = problem.transport ? jet.gradient(i).dot(problem.objective.gradient(x)) : 0.0;
    const double r = residual_from_terms(jet.value(i), drift, jet.laplacian(i), source, problem);
    if (!std::isfinite(r)) throw NumericalError("non-finite residual", std::vector<double>(x.data(), x.data() + x.size()));
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

Points test_points(const Box& domain, int n, std::uint64_t seed) {
  domain.validate();
  if (n < 1) throw ConfigError("n_test must be positive");
  Rng rng(stream_seed(seed, kTestStream));
  Points pts(domain.dim(), n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < domain.dim(); ++i) pts(i, j) = uniform_open(rng, domain.lower[i], domain.upper[i]);
  return pts;
}

ErrorReport laplacian_report(const MlpParams& params, const Problem& problem,
                             const std::function<double(const Vec&)>& exact_laplacian, int n_test,
                             std::uint64_t seed) {
  const Points pts = test_points(problem.domain, n_test, seed);
  const Vec approx = forward_jet_batch(params, pts, HessianMode::Diagonal).laplacians();
  std::vector<double> a(approx.data(), approx.data() + approx.size());
  std::vector<double> e(n_test);
  for (int i = 0; i < n_test; ++i) e[i] = exact_laplacian(pts.col(i));
  ErrorReport r;
  r.lambda = problem.lambda;
  r.e_l2_rel = rel_l2_error(e, a);
  r.e_linf = linf_error(e, a);
  r.residual_eps = residual_linf(params, problem, pts);
  r.n_test = n_test;
  r.seed = seed;
  return r;
}

std::vector<double> ratio_table(const std::vector<double>& errors) {
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    if (errors[k + 1] == 0.0) throw MetricError("ratio with zero error");
    ratios.push_back(errors[k] / errors[k + 1]);
  }
  return ratios;
}

std::string TrajectoryStats::to_csv() const {
  std::string out = "k,f_hat,err_mean\n";
  for (std::size_t k = 0; k < f_hat.size(); ++k)
    out += csv_line({format_number(static_cast<std::int64_t>(k)), format_number(f_hat[k]),
                     err.empty() ? std::string() : format_number(err[k])});
  return out;
}

TrajectoryStats trajectory_stats(const TrajectoryLog& log, const std::vector<Vec>& minimizers) {
  if (log.n_traj < 1) throw ContractError("empty trajectory log");
  if (minimizers.empty()) throw ContractError("trajectory statistics need a minimizer");
  const int steps = log.horizon + 1;
  TrajectoryStats s{std::vector<double>(steps, 0.0), std::vector<double>(steps, 0.0)};
  for (int k = 0; k < steps; ++k) {
    for (int j = 0; j < log.n_traj; ++j) {
      s.f_hat[k] += log.objective(j, k);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : minimizers) best = std::min(best, (log.state(j, k) - m).norm());
      s.err[k] += best;
    }
    s.f_hat[k] /= log.n_traj;
    s.err[k] /= log.n_traj;
  }
  return s;
}

}  // namespace ehjb
