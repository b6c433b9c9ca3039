#ifndef EHJB_METRICS_HPP
#define EHJB_METRICS_HPP

#include <string>
#include <vector>

#include "ehjb/diffnet.hpp"
#include "ehjb/ehjb_ops.hpp"
#include "ehjb/langevin.hpp"

namespace ehjb {

class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct ErrorReport {
  double lambda = 0.0;
  double e_l2_rel = 0.0;
  double e_linf = 0.0;
  double residual_eps = 0.0;
  int n_test = 0;
  std::uint64_t seed = 0;

  static std::string csv_header();  // lambda,e_l2_rel,e_linf,residual_eps,n_test,seed
  std::string csv_row() const;
};

double rel_l2_error(const std::vector<double>& exact, const std::vector<double>& approx);
double linf_error(const std::vector<double>& exact, const std::vector<double>& approx);

/// max |R_lambda| of the network over the columns of test_points.
double residual_linf(const MlpParams& params, const Problem& problem, const Points& test_points);

/// Uniform test points from a stream reserved for evaluation.
Points test_points(const Box& domain, int n, std::uint64_t seed);

/// Laplacian errors and residual of a trained network against the manufactured
/// Laplacian `exact_laplacian` on n_test fresh points.
ErrorReport laplacian_report(const MlpParams& params, const Problem& problem,
                             const std::function<double(const Vec&)>& exact_laplacian, int n_test,
                             std::uint64_t seed);

/// ratios[k] = errors[k] / errors[k+1] for errors listed at lambda, lambda/2, ...
std::vector<double> ratio_table(const std::vector<double>& errors);

struct TrajectoryStats {
  std::vector<double> f_hat;  // mean objective per step
  std::vector<double> err;    // mean distance to the nearest minimizer per step

  /// Header k,f_hat,err_mean.
  std::string to_csv() const;
};

TrajectoryStats trajectory_stats(const TrajectoryLog& log, const std::vector<Vec>& minimizers);

}  // namespace ehjb

#endif  // EHJB_METRICS_HPP
