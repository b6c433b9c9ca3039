#ifndef EHJB_FD_REFERENCE_HPP
#define EHJB_FD_REFERENCE_HPP

#include <functional>
#include <string>
#include <vector>

#include "ehjb/common.hpp"
#include "ehjb/ehjb_ops.hpp"

namespace ehjb {

/// Uniform 1D grid x_i = x_left + i dx, i = 0..n_points-1.
struct FdGrid {
  double x_left = -6.0;
  double x_right = 6.0;
  int n_points = 1001;

  double spacing() const { return (x_right - x_left) / (n_points - 1); }
  double x(int i) const { return x_left + i * spacing(); }
  void validate() const;
};

/// Pointwise data of -rho v + f + u v'' + b v' = 0 with drift b = -f'.
struct FdData {
  double rho = 0.4;
  std::vector<double> f;
  std::vector<double> b;

  static FdData sample(const Objective& objective, double rho, const FdGrid& grid);
};

/// Solves the Neumann + interior rows for a fixed per-node control.
std::vector<double> policy_evaluation(const std::vector<double>& policy, const FdData& data, const FdGrid& grid);

/// Central second difference at interior nodes; endpoints copy their neighbour.
std::vector<double> discrete_curvature(const std::vector<double>& values, const FdGrid& grid);

/// u_min where the curvature is >= 0, else u_max.
std::vector<double> policy_improvement(const std::vector<double>& values, const FdGrid& grid,
                                       const ControlSet& control);

/// Interior row residuals for a fixed control (zero at the Neumann rows).
std::vector<double> row_residuals(const std::vector<double>& values, const std::vector<double>& policy,
                                  const FdData& data, const FdGrid& grid);

/// max_i |min over {u_min, u_max} of row i|, divided by the row scale
/// rho + 2u/dx^2 + |b|/dx, together with the Neumann mismatches.
double hjb_residual(const std::vector<double>& values, const FdData& data, const FdGrid& grid,
                    const ControlSet& control);

struct HowardResult {
  std::vector<double> values;
  std::vector<double> curvature;
  std::vector<double> policy;
  std::vector<double> noise;  // sqrt(2 u)
  int iterations = 0;
  bool converged = false;
  double last_policy_change = 0.0;

  /// Header x,v,v_xx,policy,noise_classical.
  std::string to_csv(const FdGrid& grid) const;
};

using HowardObserver = std::function<void(int iteration, const std::vector<double>& values)>;

/// Policy iteration from u = u_max; stops when the sup-norm policy change drops
/// below eps_u or after k_max evaluations (then converged = false).
HowardResult howard_solve(const FdData& data, const FdGrid& grid, const ControlSet& control, double eps_u = 1e-4,
                          int k_max = 2000, const HowardObserver& observer = {});

}  // namespace ehjb

#endif  // EHJB_FD_REFERENCE_HPP
