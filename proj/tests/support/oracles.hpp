#ifndef EHJB_TESTS_ORACLES_HPP
#define EHJB_TESTS_ORACLES_HPP

#include <functional>
#include <stdexcept>
#include <vector>

#include "ehjb/ehjb_ops.hpp"

namespace ehjb::testing {

class OracleRangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

struct PartitionOracle {
  long double log_z = 0.0L;  // ln Z
  double z_value = 0.0;      // Z itself, may overflow to inf
  double log_partition = 0.0;
  double noise = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1], long double.
struct GaussLegendre {
  std::vector<long double> nodes;
  std::vector<long double> weights;
};
const GaussLegendre& gauss_legendre(int n);

/// Z = int_U exp(-u lap / lambda) du, H = -lambda ln Z and h = sqrt(2 E[u]) by
/// composite Gauss-Legendre quadrature in long double. The integrand is scaled
/// by its maximum and the interval is cut so that no piece spans more than 8
/// units of exponent.
PartitionOracle oracle_partition(double laplacian, double lambda, const ControlSet& control, int nodes = 64);

/// Central differences.
double fd_derivative(const std::function<double(double)>& f, double x, double step);

/// Dense Gaussian elimination with partial pivoting (long double).
std::vector<double> dense_solve(std::vector<std::vector<long double>> a, std::vector<long double> b);

}  // namespace ehjb::testing

#endif  // EHJB_TESTS_ORACLES_HPP
