// Fused OpenMP matvec against the serial term-by-term reference.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "tsre/ensemble.hpp"
#include "tsre/hamiltonian.hpp"

namespace {

tsre::HamiltonianOperator make_operator(int n) {
  auto g = std::make_shared<tsre::InteractionGraph>(tsre::build_chain(n, 1.0, 1.0));
  return tsre::HamiltonianOperator(tsre::sample(g, 7, 0));
}

void BM_ApplyFused(benchmark::State& state) {
  const auto h = make_operator(static_cast<int>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  const tsre::Vector x = tsre::random_state(h.dimension(), 1, 0, 0);
  tsre::Vector y;
  for (auto _ : state) {
    h.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * h.dimension());
}

void BM_ApplyReference(benchmark::State& state) {
  const auto h = make_operator(static_cast<int>(state.range(0)));
  const tsre::Vector x = tsre::random_state(h.dimension(), 1, 0, 0);
  tsre::Vector y;
  for (auto _ : state) {
    h.apply_reference(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * h.dimension());
}

}  // namespace

BENCHMARK(BM_ApplyFused)
    ->ArgsProduct({{10, 14, 18}, {1, 2, 4}})
    ->ArgNames({"N", "threads"})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ApplyReference)->DenseRange(10, 18, 4)->ArgName("N")->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
