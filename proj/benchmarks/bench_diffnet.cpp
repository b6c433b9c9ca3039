#include <benchmark/benchmark.h>

#include "ehjb/diffnet.hpp"

namespace {

using namespace ehjb;

MlpParams network(int dim) { return init_network(3, {dim, 32, 32, 32, 32, 32, 1}); }

Points points(int dim, int n) {
  Rng rng(11);
  Points p(dim, n);
  for (Eigen::Index j = 0; j < p.size(); ++j) p.data()[j] = uniform_open(rng, -1.0, 1.0);
  return p;
}

void BM_ForwardValues(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const MlpParams net = network(dim);
  const Points x = points(dim, 256);
  for (auto _ : state) benchmark::DoNotOptimize(forward_values(net, x));
  state.SetItemsProcessed(state.iterations() * x.cols());
}
BENCHMARK(BM_ForwardValues)->Arg(1)->Arg(6);

void BM_JetBatch(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const auto mode = state.range(1) == 0 ? HessianMode::Diagonal : HessianMode::Full;
  const MlpParams net = network(dim);
  const Points x = points(dim, 256);
  for (auto _ : state) benchmark::DoNotOptimize(forward_jet_batch(net, x, mode).channels.data());
  state.SetItemsProcessed(state.iterations() * x.cols());
}
BENCHMARK(BM_JetBatch)->Args({1, 0})->Args({2, 0})->Args({6, 0})->Args({6, 1});

void BM_JetBackward(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const MlpParams net = network(dim);
  const Points x = points(dim, 256);
  Tape tape;
  for (auto _ : state) {
    tape.clear();
    const BatchJet jet = forward_jet_batch(net, x, HessianMode::Diagonal, &tape);
    tape.set_output_adjoint(0, Eigen::MatrixXd::Constant(jet.channels.rows(), jet.channels.cols(), 1.0));
    tape.terminate(jet.channels.sum());
    benchmark::DoNotOptimize(backward(tape).weights.front().data());
  }
  state.SetItemsProcessed(state.iterations() * x.cols());
}
BENCHMARK(BM_JetBackward)->Arg(1)->Arg(6);

}  // namespace
