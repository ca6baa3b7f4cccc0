#include "fchern/linalg.hpp"
#include "fchern/models.hpp"
#include "fchern/propagator.hpp"
#include "fchern/topology.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fchern;

ComplexMatrix random_hermitian(int n) {
  ComplexMatrix a = ComplexMatrix::Random(n, n);
  return 0.5 * (a + a.adjoint());
}

void BM_HermitianEig(benchmark::State& state) {
  const ComplexMatrix h = random_hermitian(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(h));
}
BENCHMARK(BM_HermitianEig)->Arg(2)->Arg(3)->Arg(4)->Arg(9)->Arg(32);

void BM_ExpmSkew(benchmark::State& state) {
  const ComplexMatrix h = random_hermitian(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(expm_skew(h, 0.37));
}
BENCHMARK(BM_ExpmSkew)->Arg(2)->Arg(3)->Arg(9);

void BM_UnitaryEig(benchmark::State& state) {
  const ComplexMatrix u = expm_skew(random_hermitian(static_cast<int>(state.range(0))), 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(unitary_eig(u));
}
BENCHMARK(BM_UnitaryEig)->Arg(2)->Arg(3)->Arg(9);

void BM_FloquetOperatorH2(benchmark::State& state) {
  const ModelFamily f = h2_family(0.0);
  const double tau = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(floquet_operator(f, tau, 0.4, 1e-9));
}
BENCHMARK(BM_FloquetOperatorH2)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_FloquetOperatorHarper(benchmark::State& state) {
  const ModelFamily f = harper_family(1, 3);
  const double tau = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(floquet_operator(f, tau, 0.4, 1e-9));
}
BENCHMARK(BM_FloquetOperatorHarper)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ChernStaticHarper(benchmark::State& state) {
  const ModelFamily f = harper_family(1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(chern_static_all(f));
}
BENCHMARK(BM_ChernStaticHarper)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
