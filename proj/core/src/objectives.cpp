#include "ehjb/objectives.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace ehjb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFreq = kPi / 3.0;

}  // namespace

// ---- manufactured cosine --------------------------------------------------

ManufacturedCosine::ManufacturedCosine(int dim, double rho, ControlSet control)
    : dim_(dim), rho_(rho), control_(control) {
  if (dim < 1) throw ConfigError("manufactured dimension must be >= 1");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  control_.validate();
}

double ManufacturedCosine::value(const Vec& x) const {
  double v = 1.0;
  for (int i = 0; i < dim_; ++i) v *= std::cos(kFreq * x[i]);
  return v;
}

Vec ManufacturedCosine::gradient(const Vec& x) const {
  Vec g(dim_);
  for (int k = 0; k < dim_; ++k) {
    double p = -kFreq * std::sin(kFreq * x[k]);
    for (int i = 0; i < dim_; ++i)
      if (i != k) p *= std::cos(kFreq * x[i]);
    g[k] = p;
  }
  return g;
}

Eigen::MatrixXd ManufacturedCosine::hessian(const Vec& x) const {
  Eigen::MatrixXd h(dim_, dim_);
  for (int k = 0; k < dim_; ++k) {
    for (int l = 0; l < dim_; ++l) {
      double p = 1.0;
      for (int i = 0; i < dim_; ++i) {
        const double c = std::cos(kFreq * x[i]);
        const double s = std::sin(kFreq * x[i]);
        if (i == k && i == l) p *= -kFreq * kFreq * c;
        else if (i == k || i == l) p *= -kFreq * s;
        else p *= c;
      }
      h(k, l) = p;
    }
  }
  return h;
}

double ManufacturedCosine::laplacian(const Vec& x) const {
  return -dim_ * kFreq * kFreq * value(x);
}

EvalJet ManufacturedCosine::jet(const Vec& x) const {
  return EvalJet{value(x), gradient(x), hessian(x)};
}

double ManufacturedCosine::source(const Vec& x) const {
  return rho_ * value(x) - classical_hamiltonian(laplacian(x), control_);
}

double ManufacturedCosine::source_lambda(const Vec& x, double lambda) const {
  return rho_ * value(x) - log_partition(laplacian(x), lambda, control_);
}

Problem ManufacturedCosine::problem(double lambda) const {
  Problem p;
  auto self = *this;
  p.objective.value = [self](const Vec& x) { return self.value(x); };
  p.objective.gradient = [self](const Vec& x) { return self.gradient(x); };
  p.domain = domain();
  p.rho = rho_;
  p.lambda = lambda;
  p.control = control_;
  p.source = [self](const Vec& x) { return self.source(x); };
  p.transport = false;
  p.validate();
  return p;
}

// ---- benchmarks -----------------------------------------------------------

double Benchmark::distance_to_minimizers(const Vec& x) const {
  if (minimizers.empty()) throw ConfigError("benchmark " + name + " lists no minimizers");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : minimizers) best = std::min(best, (x - m).norm());
  return best;
}

Benchmark double_well_1d() {
  Benchmark b;
  b.name = "double_well_1d";
  b.domain = Box::cube(1, -6.0, 6.0);
  b.objective.value = [](const Vec& v) {
    const double x = v[0];
    if (x > 6.0) return 4.0 * x - 20.0;
    if (x > 2.0) return (x - 4.0) * (x - 4.0);
    if (x > -2.0) return 8.0 - x * x;
    if (x > -6.0) return 2.0 * (x + 3.0) * (x + 3.0) + 2.0;
    return -(12.0 * x + 52.0);
  };
  // Breakpoints take the branch to their right; f is C^1 so both sides agree.
  b.objective.gradient = [](const Vec& v) {
    const double x = v[0];
    double g;
    if (x >= 6.0) g = 4.0;
    else if (x >= 2.0) g = 2.0 * (x - 4.0);
    else if (x >= -2.0) g = -2.0 * x;
    else if (x >= -6.0) g = 4.0 * (x + 3.0);
    else g = -12.0;
    return Vec::Constant(1, g);
  };
  b.minimizers = {Vec::Constant(1, 4.0)};
  b.notes = "global minimizer x=4, local minimum x=-3 with f=2";
  return b;
}

namespace {

constexpr std::array<double, 25> kMixtureWeights = {
    0.4559, 0.2559, 0.3089, 0.2974, 0.2947,  //
    0.4972, 0.5326, 0.3268, 0.4997, 0.5220,  //
    0.4020, 0.3167, 0.5011, 0.3068, 0.4747,  //
    0.4392, 0.5339, 1.6552, 0.4931, 0.4037,  //
    0.3124, 0.2915, 0.3972, 0.4242, 0.2974};
constexpr double kMixtureVariance = 0.1;

}  // namespace

Benchmark gaussian_mixture_2d() {
  Benchmark b;
  b.name = "gauss_mix_2d";
  b.domain = Box::cube(2, -1.0, 5.0);
  b.objective.value = [](const Vec& x) {
    double f = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double dx = x[0] - i / 5, dy = x[1] - i % 5;
      f -= kMixtureWeights[i] * std::exp(-0.5 * (dx * dx + dy * dy) / kMixtureVariance);
    }
    return f;
  };
  b.objective.gradient = [](const Vec& x) {
    Vec g = Vec::Zero(2);
    for (int i = 0; i < 25; ++i) {
      const double dx = x[0] - i / 5, dy = x[1] - i % 5;
      const double e = kMixtureWeights[i] * std::exp(-0.5 * (dx * dx + dy * dy) / kMixtureVariance);
      g[0] += e * dx / kMixtureVariance;
      g[1] += e * dy / kMixtureVariance;
    }
    return g;
  };
  b.minimizers = {(Vec(2) << 3.0, 2.0).finished()};
  b.notes = "25 isotropic wells on {0..4}^2, means (row, col); deepest at (3,2)";
  return b;
}

Benchmark easom_2d() {
  Benchmark b;
  b.name = "easom_2d";
  b.domain = Box::cube(2, -10.0, 10.0);
  b.objective.value = [](const Vec& x) {
    const double a = x[0] - kPi, c = x[1] - kPi;
    return -std::cos(x[0]) * std::cos(x[1]) * std::exp(-a * a - c * c);
  };
  b.objective.gradient = [](const Vec& x) {
    const double a = x[0] - kPi, c = x[1] - kPi;
    const double e = std::exp(-a * a - c * c);
    const double c0 = std::cos(x[0]), c1 = std::cos(x[1]);
    const double s0 = std::sin(x[0]), s1 = std::sin(x[1]);
    Vec g(2);
    g[0] = e * c1 * (s0 + 2.0 * a * c0);
    g[1] = e * c0 * (s1 + 2.0 * c * c1);
    return g;
  };
  b.minimizers = {(Vec(2) << kPi, kPi).finished()};
  b.notes = "flat plateau with a single narrow well at (pi, pi)";
  return b;
}

namespace {

constexpr std::array<double, 4> kHartAlpha = {1.0, 1.2, 3.0, 3.2};
constexpr double kHartA[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
constexpr double kHartP[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                 {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                 {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                 {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
constexpr double kHartScale = 1.94;
constexpr double kHartShift = 2.58;

double hartmann_term(const Vec& x, int i) {
  double s = 0.0;
  for (int j = 0; j < 6; ++j) {
    const double d = x[j] - kHartP[i][j];
    s += kHartA[i][j] * d * d;
  }
  return kHartAlpha[i] * std::exp(-s);
}

}  // namespace

double hartmann_raw(const Vec& x) {
  double f = 0.0;
  for (int i = 0; i < 4; ++i) f -= hartmann_term(x, i);
  return f;
}

Benchmark hartmann_6d() {
  Benchmark b;
  b.name = "hartmann_6d";
  b.domain = Box::cube(6, 0.0, 1.0);
  b.objective.value = [](const Vec& x) { return (hartmann_raw(x) + kHartShift) / kHartScale; };
  b.objective.gradient = [](const Vec& x) {
    Vec g = Vec::Zero(6);
    for (int i = 0; i < 4; ++i) {
      const double t = hartmann_term(x, i);
      for (int j = 0; j < 6; ++j) g[j] += 2.0 * kHartA[i][j] * (x[j] - kHartP[i][j]) * t;
    }
    return Vec(g / kHartScale);
  };
  b.minimizers = {(Vec(6) << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573).finished()};
  b.notes = "rescaled Hartmann-6; the unscaled sum at the minimizer is -3.32237, the rescaled value about -0.38266";
  return b;
}

Benchmark cosine_benchmark(int dim) {
  auto m = std::make_shared<const ManufacturedCosine>(dim, 1.0, ControlSet{0.2, 1.0});
  Benchmark b;
  b.name = "cosine_d" + std::to_string(dim);
  b.objective.value = [m](const Vec& x) { return m->value(x); };
  b.objective.gradient = [m](const Vec& x) { return m->gradient(x); };
  b.domain = m->domain();
  b.notes = "manufactured solution prod cos(pi x_i / 3); objective is the exact v, no minimizer targets";
  b.manufactured = std::move(m);
  return b;
}

std::vector<std::string> benchmark_names() {
  return {"double_well_1d", "gauss_mix_2d", "easom_2d", "hartmann_6d", "cosine_d1", "cosine_d2", "cosine_d4"};
}

Benchmark find_benchmark(const std::string& name) {
  if (name == "double_well_1d") return double_well_1d();
  if (name == "gauss_mix_2d") return gaussian_mixture_2d();
  if (name == "easom_2d") return easom_2d();
  if (name == "hartmann_6d") return hartmann_6d();
  if (name == "cosine_d1") return cosine_benchmark(1);
  if (name == "cosine_d2") return cosine_benchmark(2);
  if (name == "cosine_d4") return cosine_benchmark(4);
  throw ConfigError("unknown benchmark '" + name + "'");
}

Problem make_problem(const Benchmark& benchmark, double rho, double lambda, const ControlSet& control) {
  if (benchmark.manufactured)
    return ManufacturedCosine(benchmark.dim(), rho, control).problem(lambda);
  Problem p;
  p.objective = benchmark.objective;
  p.domain = benchmark.domain;
  p.rho = rho;
  p.lambda = lambda;
  p.control = control;
  p.validate();
  return p;
}

}  // namespace ehjb
