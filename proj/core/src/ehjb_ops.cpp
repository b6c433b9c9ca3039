#include "ehjb/ehjb_ops.hpp"

#include <algorithm>
#include <cmath>

namespace ehjb {

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive and finite");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ContractError(std::string(what) + " must be finite");
}

// ln((e^z - 1) / z)
double log_expm1_ratio(double z) {
  if (std::abs(z) < kSeriesCutoff) {
    const double z2 = z * z;
    return z / 2.0 + z2 / 24.0 - z2 * z2 / 2880.0 + z2 * z2 * z2 / 181440.0;
  }
  if (z > 0.0) return z + std::log(-std::expm1(-z)) - std::log(z);
  return std::log(-std::expm1(z)) - std::log(-z);
}

std::vector<double> to_vector(const Vec& x) {
  return std::vector<double>(x.data(), x.data() + x.size());
}

}  // namespace

void ControlSet::validate() const {
  if (!std::isfinite(u_min) || !std::isfinite(u_max) || !(u_min > 0.0) || !(u_min < u_max))
    throw ConfigError("control set needs 0 < u_min < u_max");
}

void Problem::validate() const {
  domain.validate();
  control.validate();
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be positive");
  require_lambda(lambda);
  if (!objective.value) throw ConfigError("problem has no objective");
  if (transport && !objective.gradient) throw ConfigError("problem has no objective gradient");
}

double Problem::source_at(const Vec& x) const {
  return source ? source(x) : objective.value(x);
}

double z_of(double laplacian, double lambda, const ControlSet& control) {
  require_finite(laplacian, "laplacian");
  require_lambda(lambda);
  return -control.delta() * laplacian / lambda;
}

double log_partition(double laplacian, double lambda, const ControlSet& control) {
  const double z = z_of(laplacian, lambda, control);
  // -lambda (u_min/delta) z simplifies to u_min * laplacian.
  return control.u_min * laplacian - lambda * (std::log(control.delta()) + log_expm1_ratio(z));
}

double gibbs_fraction(double z) {
  double psi;
  if (std::abs(z) < kSeriesCutoff) {
    const double z2 = z * z;
    psi = 0.5 + z / 12.0 - z * z2 / 720.0 + z * z2 * z2 / 30240.0;
  } else if (z > 0.0) {
    const double em = std::expm1(-z);  // e^{-z} - 1
    psi = (z + em) / (z * -em);
  } else {
    const double em = std::expm1(z);
    psi = (z + (z - 1.0) * em) / (z * em);
  }
  return std::clamp(psi, 0.0, 1.0);
}

double log_partition_slope(double laplacian, double lambda, const ControlSet& control) {
  return control.u_min + control.delta() * gibbs_fraction(z_of(laplacian, lambda, control));
}

double noise_coeff(double laplacian, double lambda, const ControlSet& control) {
  const double mean_u = log_partition_slope(laplacian, lambda, control);
  return std::clamp(std::sqrt(2.0 * mean_u), std::sqrt(2.0 * control.u_min), std::sqrt(2.0 * control.u_max));
}

double classical_control(double laplacian, const ControlSet& control) {
  return laplacian >= 0.0 ? control.u_min : control.u_max;
}

double classical_hamiltonian(double laplacian, const ControlSet& control) {
  return classical_control(laplacian, control) * laplacian;
}

double residual_from_terms(double value, double drift_dot, double laplacian, double source,
                           const Problem& problem) {
  return -problem.rho * value + source - drift_dot + log_partition(laplacian, problem.lambda, problem.control);
}

namespace {

struct PointTerms {
  double source;
  double drift_dot;
};

PointTerms point_terms(const EvalJet& jet, const Vec& x, const Problem& problem) {
  if (x.size() != problem.dim() || jet.gradient.size() != problem.dim())
    throw ContractError("jet/point dimension does not match problem");
  PointTerms t{problem.source_at(x), 0.0};
  if (!std::isfinite(t.source)) throw NumericalError("non-finite objective value", to_vector(x));
  if (problem.transport) {
    const Vec g = problem.objective.gradient(x);
    if (!g.allFinite()) throw NumericalError("non-finite objective gradient", to_vector(x));
    t.drift_dot = jet.gradient.dot(g);
  }
  return t;
}

}  // namespace

double pde_residual(const EvalJet& jet, const Vec& x, const Problem& problem) {
  const PointTerms t = point_terms(jet, x, problem);
  return residual_from_terms(jet.value, t.drift_dot, jet.laplacian(), t.source, problem);
}

double pde_residual_classical(const EvalJet& jet, const Vec& x, const Problem& problem) {
  const PointTerms t = point_terms(jet, x, problem);
  return -problem.rho * jet.value + t.source - t.drift_dot + classical_hamiltonian(jet.laplacian(), problem.control);
}

double boundary_residual(const EvalJet& jet, const Vec& outward_normal) {
  if (jet.gradient.size() != outward_normal.size()) throw ContractError("normal dimension mismatch");
  return jet.gradient.dot(outward_normal);
}

}  // namespace ehjb
