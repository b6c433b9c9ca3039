#include <benchmark/benchmark.h>

#include <vector>

#include "ehjb/ehjb_ops.hpp"

namespace {

using namespace ehjb;

std::vector<double> laplacians(int n) {
  Rng rng(5);
  std::vector<double> out(n);
  for (double& v : out) v = uniform_open(rng, -50.0, 50.0);
  return out;
}

void BM_LogPartition(benchmark::State& state) {
  const ControlSet control{0.2, 1.0};
  const auto laps = laplacians(1024);
  for (auto _ : state)
    for (double lap : laps) benchmark::DoNotOptimize(log_partition(lap, 0.02, control));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(laps.size()));
}
BENCHMARK(BM_LogPartition);

void BM_NoiseCoeff(benchmark::State& state) {
  const ControlSet control{1e-8, 142.0};
  const auto laps = laplacians(1024);
  for (auto _ : state)
    for (double lap : laps) benchmark::DoNotOptimize(noise_coeff(lap, 0.04, control));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(laps.size()));
}
BENCHMARK(BM_NoiseCoeff);

}  // namespace
