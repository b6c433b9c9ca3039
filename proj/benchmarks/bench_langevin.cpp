#include <benchmark/benchmark.h>

#include "ehjb/langevin.hpp"
#include "ehjb/objectives.hpp"
#include "ehjb/pinn_solver.hpp"

namespace {

using namespace ehjb;

void BM_EmStepNetworkNoise(benchmark::State& state) {
  const Benchmark bench = state.range(0) == 1 ? double_well_1d() : hartmann_6d();
  const ControlSet control{1e-8, 142.0};
  const MlpParams net = init_network(4, network_sizes(bench.dim(), train_preset("ci")));
  const NoiseField noise = network_noise(net, 0.04, control, 0.0);
  const auto grad = [&](const Vec& x) { return bench.gradient(x); };
  LangevinConfig config;
  Rng rng(9);
  std::normal_distribution<double> normal;
  Vec x(bench.dim());
  for (int k = 0; k < bench.dim(); ++k) x[k] = 0.5 * (bench.domain.lower[k] + bench.domain.upper[k]);
  Vec draw(bench.dim());
  for (auto _ : state) {
    for (Eigen::Index k = 0; k < draw.size(); ++k) draw[k] = normal(rng);
    x = em_step(x, grad, noise, config, draw, bench.domain);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_EmStepNetworkNoise)->Arg(1)->Arg(6);

}  // namespace
