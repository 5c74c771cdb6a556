// Cost of one barrier evaluation at an interior point of the QKD cone built
// for an MUB instance: set_point, gradient and a Newton-system solve.

#include <benchmark/benchmark.h>

#include <complex>

#include "qkdrate/protocols.hpp"
#include "qkdrate/std_cones.hpp"

namespace {

using namespace qkdrate;
using C = std::complex<double>;

ConeDescriptor<C> mub_cone(int d) {
  KeyRateOptions<double> opts;
  const auto cert = reduce_instance(mub<C>(d, 0.95), opts);
  return ConeDescriptor<C>::qkd(cert.ghat, cert.zhat);
}

void BM_QkdSetPoint(benchmark::State& state) {
  auto cone = make_cone(mub_cone(int(state.range(0))));
  const Vec<double> x = cone->initial_point();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cone->set_point(x));
    benchmark::DoNotOptimize(cone->gradient());
  }
  state.counters["dim"] = double(cone->dim());
}
BENCHMARK(BM_QkdSetPoint)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMicrosecond);

void BM_QkdInverseHessian(benchmark::State& state) {
  const auto desc = mub_cone(int(state.range(0)));
  auto cone = make_cone(desc);
  const Vec<double> x = cone->initial_point();
  const Mat<double> rhs = Mat<double>::Identity(cone->dim(), 8);
  for (auto _ : state) {
    cone->set_point(x);  // drops the cached factorization
    benchmark::DoNotOptimize(cone->inv_hess_prod(rhs));
  }
}
BENCHMARK(BM_QkdInverseHessian)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_QkdThirdOrder(benchmark::State& state) {
  auto cone = make_cone(mub_cone(int(state.range(0))));
  const Vec<double> x = cone->initial_point();
  cone->set_point(x);
  const Vec<double> d = Vec<double>::Ones(cone->dim()) / std::sqrt(double(cone->dim()));
  for (auto _ : state) benchmark::DoNotOptimize(cone->third_order(d));
}
BENCHMARK(BM_QkdThirdOrder)->Arg(3)->Arg(5)->Arg(7)->Unit(benchmark::kMicrosecond);

}  // namespace
