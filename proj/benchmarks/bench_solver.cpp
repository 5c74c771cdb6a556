// Solver wall time on the reduced problems; problem construction and facial
// reduction happen outside the timed region.

#include <benchmark/benchmark.h>

#include <complex>

#include "qkdrate/protocols.hpp"

namespace {

using namespace qkdrate;

template <typename T>
void run_solves(benchmark::State& state, const ProtocolInstance<T>& in) {
  using Real = RealOf<T>;
  KeyRateOptions<Real> opts;
  const auto prob = build_qkd_problem<T>(reduce_instance(in, opts));
  int iterations = 0;
  double h = 0;
  for (auto _ : state) {
    const auto rep = solve(prob, opts.solver);
    iterations = rep.iterations;
    h = to_double(rep.primal_obj / ln2<Real>());
    benchmark::DoNotOptimize(h);
  }
  state.counters["iters"] = iterations;
  state.counters["bits"] = h;
  state.counters["n"] = double(in.dim());
}

void BM_Bb84(benchmark::State& state) { run_solves(state, bb84<double>(0.025, 0.025)); }
BENCHMARK(BM_Bb84)->Unit(benchmark::kMillisecond);

void BM_Bb84Extended(benchmark::State& state) {
  const Extended q("0.025");
  run_solves(state, bb84<Extended>(q, q));
}
BENCHMARK(BM_Bb84Extended)->Unit(benchmark::kMillisecond);

void BM_Mub(benchmark::State& state) {
  run_solves(state, mub<std::complex<double>>(int(state.range(0)), 0.95));
}
BENCHMARK(BM_Mub)->Arg(2)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_Overlap(benchmark::State& state) { run_solves(state, overlap<double>(int(state.range(0)), 0.95)); }
BENCHMARK(BM_Overlap)->DenseRange(2, 8)->Unit(benchmark::kMillisecond);

void BM_OverlapComplex(benchmark::State& state) {
  run_solves(state, overlap<std::complex<double>>(int(state.range(0)), 0.95));
}
BENCHMARK(BM_OverlapComplex)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

}  // namespace
