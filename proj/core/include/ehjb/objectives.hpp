#ifndef EHJB_OBJECTIVES_HPP
#define EHJB_OBJECTIVES_HPP

#include <memory>
#include <string>
#include <vector>

#include "ehjb/common.hpp"
#include "ehjb/ehjb_ops.hpp"

namespace ehjb {

/// v(x) = prod_i cos(pi x_i / 3) on [-3,3]^d, an exact Neumann-compatible
/// solution of -rho v + g + min_U(u lap v) = 0.
class ManufacturedCosine {
 public:
  ManufacturedCosine(int dim, double rho, ControlSet control);

  int dim() const noexcept { return dim_; }
  double rho() const noexcept { return rho_; }
  const ControlSet& control() const noexcept { return control_; }
  Box domain() const { return Box::cube(dim_, -3.0, 3.0); }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Eigen::MatrixXd hessian(const Vec& x) const;
  double laplacian(const Vec& x) const;
  EvalJet jet(const Vec& x) const;

  /// g = rho v - min_U(u lap v).
  double source(const Vec& x) const;
  /// g_lambda = rho v - H_lambda(lap v): makes v an exact eHJB solution.
  double source_lambda(const Vec& x, double lambda) const;

  /// The eHJB instance with source g and no drift term.
  Problem problem(double lambda) const;

 private:
  int dim_;
  double rho_;
  ControlSet control_;
};

struct Benchmark {
  std::string name;
  Objective objective;
  Box domain;
  std::vector<Vec> minimizers;
  std::string notes;
  /// Set for the cosine_d* instances only.
  std::shared_ptr<const ManufacturedCosine> manufactured;

  int dim() const noexcept { return domain.dim(); }
  double evaluate(const Vec& x) const { return objective.value(x); }
  Vec gradient(const Vec& x) const { return objective.gradient(x); }
  /// E(x) = min_i |x - x_i|; throws ConfigError when no minimizer is listed.
  double distance_to_minimizers(const Vec& x) const;
};

Benchmark double_well_1d();
Benchmark gaussian_mixture_2d();
Benchmark easom_2d();
Benchmark hartmann_6d();
/// Registry entry for the manufactured instance with rho = 1, U = [0.2, 1].
Benchmark cosine_benchmark(int dim);

/// Unscaled Hartmann sum -sum_i alpha_i exp(-sum_j A_ij (x_j - P_ij)^2).
double hartmann_raw(const Vec& x);

std::vector<std::string> benchmark_names();
/// Throws ConfigError for unknown names.
Benchmark find_benchmark(const std::string& name);

/// eHJB instance for a benchmark. Manufactured entries use the cosine source
/// rebuilt for (rho, control) and no drift; others use f and grad f.
Problem make_problem(const Benchmark& benchmark, double rho, double lambda, const ControlSet& control);

}  // namespace ehjb

#endif  // EHJB_OBJECTIVES_HPP
