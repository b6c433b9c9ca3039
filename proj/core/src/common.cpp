#include "ehjb/common.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ehjb {

NumericalError::NumericalError(const std::string& what, std::vector<double> point)
    : std::runtime_error(what), point_(std::move(point)) {}

Box Box::cube(int dim, double lo, double hi) {
  if (dim < 1) throw ConfigError("box dimension must be positive");
  Box box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  box.validate();
  return box;
}

void Box::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    throw ConfigError("box bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
      throw ConfigError("degenerate box: need lower < upper on axis " + std::to_string(i));
  }
}

bool Box::contains(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

double uniform_open(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double x = lo + (hi - lo) * unit(rng);
    if (x > lo && x < hi) return x;
  }
}

int resolve_workers(int requested) noexcept {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  workers = std::min(resolve_workers(workers), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

}  // namespace ehjb
