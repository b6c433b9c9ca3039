#include <benchmark/benchmark.h>

#include "ehjb/fd_reference.hpp"
#include "ehjb/objectives.hpp"
#include "ehjb/pinn_solver.hpp"

namespace {

using namespace ehjb;

void BM_LossAndGradient(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const Benchmark bench = cosine_benchmark(dim);
  const Problem problem = make_problem(bench, 1.0, 0.02, ControlSet{0.2, 1.0});
  TrainConfig config = train_preset("ci");
  const MlpParams net = init_network(1, network_sizes(dim, config));
  Rng rng(2);
  const Points interior = sample_interior(bench.domain, config.n_interior, rng);
  const BoundaryBatch boundary = sample_boundary(bench.domain, config.n_boundary, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(loss_and_gradient(net, problem, interior, boundary, config).terms.total);
  state.SetItemsProcessed(state.iterations() * (interior.cols() + boundary.size()));
}
BENCHMARK(BM_LossAndGradient)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_HowardDoubleWell(benchmark::State& state) {
  const Benchmark bench = double_well_1d();
  const FdGrid grid{-6.0, 6.0, static_cast<int>(state.range(0))};
  const FdData data = FdData::sample(bench.objective, 0.4, grid);
  const ControlSet control{0.2, 142.0};
  for (auto _ : state) benchmark::DoNotOptimize(howard_solve(data, grid, control).iterations);
}
BENCHMARK(BM_HowardDoubleWell)->Arg(1001)->Unit(benchmark::kMillisecond);

}  // namespace
