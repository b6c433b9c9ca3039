#include "ehjb/fd_reference.hpp"

#include <algorithm>
#include <cmath>

#include "ehjb/csv.hpp"

namespace ehjb {

void FdGrid::validate() const {
  if (n_points < 3) throw ConfigError("FD grid needs at least 3 points");
  if (!std::isfinite(x_left) || !std::isfinite(x_right) || !(x_left < x_right))
    throw ConfigError("FD grid needs x_left < x_right");
}

FdData FdData::sample(const Objective& objective, double rho, const FdGrid& grid) {
  grid.validate();
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  FdData data{rho, {}, {}};
  for (int i = 0; i < grid.n_points; ++i) {
    const Vec x = Vec::Constant(1, grid.x(i));
    data.f.push_back(objective.value(x));
    data.b.push_back(-objective.gradient(x)[0]);
    if (!std::isfinite(data.f.back()) || !std::isfinite(data.b.back()))
      throw NumericalError("non-finite objective on FD grid", {grid.x(i)});
  }
  return data;
}

namespace {

struct RowCoefficients {
  double lower, diag, upper;  // coefficients of v_{i-1}, v_i, v_{i+1}
};

RowCoefficients interior_row(double u, double b, double rho, double dx) {
  const double bp = std::max(b, 0.0), bm = std::min(b, 0.0);
  const double diffusion = u / (dx * dx);
  return {diffusion - bp / dx, -rho - 2.0 * diffusion + bp / dx - bm / dx, diffusion + bm / dx};
}

void check_sizes(std::size_t n, const FdData& data, const FdGrid& grid) {
  grid.validate();
  const auto expected = static_cast<std::size_t>(grid.n_points);
  if (n != expected || data.f.size() != expected || data.b.size() != expected)
    throw ContractError("FD array sizes do not match the grid");
}

}  // namespace

std::vector<double> policy_evaluation(const std::vector<double>& policy, const FdData& data, const FdGrid& grid) {
  check_sizes(policy.size(), data, grid);
  const int n = grid.n_points;
  const double dx = grid.spacing();
  // Rows: -v0 + v1 = 0; interior; -v_{N-2} + v_{N-1} = 0; right-hand side -f_i on interior rows.
  std::vector<long double> lower(n, 0.0L), diag(n, 0.0L), upper(n, 0.0L), rhs(n, 0.0L);
  diag[0] = -1.0L;
  upper[0] = 1.0L;
  for (int i = 1; i < n - 1; ++i) {
    const RowCoefficients c = interior_row(policy[i], data.b[i], data.rho, dx);
    lower[i] = c.lower;
    diag[i] = c.diag;
    upper[i] = c.upper;
    rhs[i] = -static_cast<long double>(data.f[i]);
  }
  lower[n - 1] = -1.0L;
  diag[n - 1] = 1.0L;

  // Thomas elimination.
  for (int i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0L) throw NumericalError("singular FD system", {grid.x(i - 1)});
    const long double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0L) throw NumericalError("singular FD system", {grid.x(n - 1)});
  std::vector<long double> v(n);
  v[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) v[i] = (rhs[i] - upper[i] * v[i + 1]) / diag[i];

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<double>(v[i]);
    if (!std::isfinite(out[i])) throw NumericalError("non-finite FD solution", {grid.x(i)});
  }
  return out;
}

std::vector<double> discrete_curvature(const std::vector<double>& values, const FdGrid& grid) {
  grid.validate();
  if (values.size() != static_cast<std::size_t>(grid.n_points)) throw ContractError("values size mismatch");
  const int n = grid.n_points;
  const double dx2 = grid.spacing() * grid.spacing();
  std::vector<double> curv(n);
  for (int i = 1; i < n - 1; ++i) curv[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / dx2;
  curv[0] = curv[1];
  curv[n - 1] = curv[n - 2];
  return curv;
}

std::vector<double> policy_improvement(const std::vector<double>& values, const FdGrid& grid,
                                       const ControlSet& control) {
  const std::vector<double> curv = discrete_curvature(values, grid);
  std::vector<double> policy(curv.size());
  for (std::size_t i = 0; i < curv.size(); ++i) policy[i] = classical_control(curv[i], control);
  return policy;
}

std::vector<double> row_residuals(const std::vector<double>& values, const std::vector<double>& policy,
                                  const FdData& data, const FdGrid& grid) {
  check_sizes(values.size(), data, grid);
  check_sizes(policy.size(), data, grid);
  const int n = grid.n_points;
  const double dx = grid.spacing();
  std::vector<double> res(n, 0.0);
  for (int i = 1; i < n - 1; ++i) {
    const RowCoefficients c = interior_row(policy[i], data.b[i], data.rho, dx);
    res[i] = static_cast<double>(static_cast<long double>(c.lower) * values[i - 1] +
                                 static_cast<long double>(c.diag) * values[i] +
                                 static_cast<long double>(c.upper) * values[i + 1] + data.f[i]);
  }
  return res;
}

double hjb_residual(const std::vector<double>& values, const FdData& data, const FdGrid& grid,
                    const ControlSet& control) {
  check_sizes(values.size(), data, grid);
  const int n = grid.n_points;
  const double dx = grid.spacing();
  const std::vector<double> lo = row_residuals(values, std::vector<double>(n, control.u_min), data, grid);
  const std::vector<double> hi = row_residuals(values, std::vector<double>(n, control.u_max), data, grid);
  double worst = std::max(std::abs(values[1] - values[0]), std::abs(values[n - 1] - values[n - 2]));
  for (int i = 1; i < n - 1; ++i) {
    const bool use_min = lo[i] <= hi[i];
    const double u = use_min ? control.u_min : control.u_max;
    const double scale = data.rho + 2.0 * u / (dx * dx) + std::abs(data.b[i]) / dx;
    worst = std::max(worst, std::abs(use_min ? lo[i] : hi[i]) / scale);
  }
  return worst;
}

HowardResult howard_solve(const FdData& data, const FdGrid& grid, const ControlSet& control, double eps_u,
                          int k_max, const HowardObserver& observer) {
  control.validate();
  grid.validate();
  if (!(eps_u > 0.0) || k_max < 1) throw ConfigError("Howard stopping parameters must be positive");
  HowardResult r;
  r.policy.assign(grid.n_points, control.u_max);
  for (int k = 0; k < k_max; ++k) {
    r.values = policy_evaluation(r.policy, data, grid);
    r.iterations = k + 1;
    if (observer) observer(k, r.values);
    std::vector<double> next = policy_improvement(r.values, grid, control);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - r.policy[i]));
    r.last_policy_change = change;
    if (change < eps_u) {
      r.converged = true;
      break;
    }
    r.policy = std::move(next);
  }
  r.curvature = discrete_curvature(r.values, grid);
  r.noise.resize(r.policy.size());
  for (std::size_t i = 0; i < r.policy.size(); ++i) r.noise[i] = std::sqrt(2.0 * r.policy[i]);
  return r;
}

std::string HowardResult::to_csv(const FdGrid& grid) const {
  std::string out = "x,v,v_xx,policy,noise_classical\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out += csv_line({format_number(grid.x(static_cast<int>(i))), format_number(values[i]), format_number(curvature[i]),
                     format_number(policy[i]), format_number(noise[i])});
  return out;
}

}  // namespace ehjb
