#ifndef EHJB_EHJB_OPS_HPP
#define EHJB_EHJB_OPS_HPP

#include <functional>

#include "ehjb/common.hpp"
#include "ehjb/diffnet.hpp"

namespace ehjb {

/// Control interval U = [u_min, u_max].
struct ControlSet {
  double u_min = 0.0;
  double u_max = 0.0;

  double delta() const noexcept { return u_max - u_min; }
  /// Throws ConfigError unless 0 < u_min < u_max.
  void validate() const;
};

/// Series switch for the log-partition and noise closed forms.
inline constexpr double kSeriesCutoff = 1e-2;

/// An exploratory HJB instance on a box:
///   -rho v + s(x) - grad v . b(x) + H_lambda(lap v) = 0,  grad v . n = 0 on the boundary,
/// with s = f and b = grad f unless `source` overrides s; `transport = false`
/// drops the drift term (manufactured instances).
struct Problem {
  Objective objective;
  Box domain;
  double rho = 1.0;
  double lambda = 0.1;
  ControlSet control;
  std::function<double(const Vec&)> source;
  bool transport = true;

  int dim() const noexcept { return domain.dim(); }
  void validate() const;
  double source_at(const Vec& x) const;
};

double z_of(double laplacian, double lambda, const ControlSet& control);

/// H_lambda(laplacian) = -lambda ln int_U exp(-u laplacian / lambda) du.
double log_partition(double laplacian, double lambda, const ControlSet& control);

/// psi(z) = ((z-1)e^z + 1) / (z(e^z - 1)), the Gibbs mean of (u - u_min)/delta.
double gibbs_fraction(double z);

/// d H_lambda / d laplacian, equal to the Gibbs mean control u_min + delta psi(z).
double log_partition_slope(double laplacian, double lambda, const ControlSet& control);

/// h_lambda = sqrt(2 (u_min + delta psi(z))).
double noise_coeff(double laplacian, double lambda, const ControlSet& control);

/// Bang-bang minimizer of u * laplacian over U; ties (laplacian == 0) go to u_min.
double classical_control(double laplacian, const ControlSet& control);

/// min over U of u * laplacian.
double classical_hamiltonian(double laplacian, const ControlSet& control);

/// Residual from precomputed pointwise terms: -rho v + source - drift_dot + H_lambda(lap).
double residual_from_terms(double value, double drift_dot, double laplacian, double source,
                           const Problem& problem);

double pde_residual(const EvalJet& jet, const Vec& x, const Problem& problem);

/// Same residual with H_lambda replaced by the classical min over U.
double pde_residual_classical(const EvalJet& jet, const Vec& x, const Problem& problem);

double boundary_residual(const EvalJet& jet, const Vec& outward_normal);

}  // namespace ehjb

#endif  // EHJB_EHJB_OPS_HPP
