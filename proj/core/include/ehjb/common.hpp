#ifndef EHJB_COMMON_HPP
#define EHJB_COMMON_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ehjb {

using Vec = Eigen::VectorXd;
/// Point sets are stored column-wise: d rows, one column per point.
using Points = Eigen::MatrixXd;

// ---- errors ---------------------------------------------------------------

/// Invalid user-facing configuration (bad sizes, degenerate boxes, lambda <= 0).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Caller broke an API precondition (shape mismatch, unterminated tape).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::vector<double> point = {});
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

// ---- domain ---------------------------------------------------------------

/// Axis-aligned box prod_i [lower_i, upper_i].
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box cube(int dim, double lo, double hi);

  int dim() const noexcept { return static_cast<int>(lower.size()); }
  double width(int i) const { return upper[i] - lower[i]; }
  /// Throws ConfigError unless lower_i < upper_i for every axis.
  void validate() const;
  bool contains(const Eigen::Ref<const Vec>& x) const;
};

/// Objective f together with its closed-form gradient.
struct Objective {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

// ---- random streams -------------------------------------------------------

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `index` of a master seed. Streams are independent of
/// the order in which they are created.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Uniform draw on the open interval (lo, hi).
double uniform_open(Rng& rng, double lo, double hi);

// ---- parallel loops -------------------------------------------------------

/// Number of workers to use for `requested` (0 selects hardware concurrency).
int resolve_workers(int requested) noexcept;

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work items
/// are statically assigned, so any reduction over i done by the caller in
/// index order is independent of the worker count.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace ehjb

#endif  // EHJB_COMMON_HPP
