#include <benchmark/benchmark.h>

#include "l2inv/cwcomplex.hpp"
#include "l2inv/fincomplex.hpp"
#include "l2inv/heatzeta.hpp"
#include "l2inv/zd.hpp"

#include <cmath>
#include <random>

using namespace l2inv;

namespace {

LaurentMatrix mahler_1xy() {
  LaurentMatrix a(2, 1, 1);
  const CMatrix one = CMatrix::Constant(1, 1, Complex(1.0));
  a.add({0, 0}, one).add({1, 0}, one).add({0, 1}, one);
  return a;
}

} // namespace

static void BM_FkLogDetLine(benchmark::State &state) {
  LaurentMatrix a(1, 1, 1);
  a.add({0}, CMatrix::Constant(1, 1, Complex(2.0)));
  a.add({1}, CMatrix::Constant(1, 1, Complex(-1.0)));
  a.add({-1}, CMatrix::Constant(1, 1, Complex(-1.0)));
  const QuadraturePolicy policy;
  for (auto _ : state) benchmark::DoNotOptimize(fk_log_det_report(a, policy).value);
}
BENCHMARK(BM_FkLogDetLine)->Unit(benchmark::kMillisecond);

static void BM_FkLogDetPlane(benchmark::State &state) {
  const LaurentMatrix a = mahler_1xy();
  QuadraturePolicy policy;
  policy.rel_tol = 1e-6;
  for (auto _ : state) benchmark::DoNotOptimize(fk_log_det_report(a, policy).value);
}
BENCHMARK(BM_FkLogDetPlane)->Unit(benchmark::kMillisecond);

static void BM_DensityCurveCircle(benchmark::State &state) {
  const ZdComplex x = assemble(circle(), trivial_rep(1, 1));
  const std::vector<double> lambdas = log_grid(1e-3, 1.0, static_cast<std::size_t>(state.range(0)));
  const QuadraturePolicy policy;
  for (auto _ : state)
    benchmark::DoNotOptimize(spectral_density_curve(x, 0, lambdas, policy).values.back());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DensityCurveCircle)->RangeMultiplier(4)->Range(4, 64)->Unit(benchmark::kMillisecond);

static void BM_DensityCurveTorus(benchmark::State &state) {
  const ZdComplex x = assemble(torus(2), trivial_rep(2, 1));
  const std::vector<double> lambdas = log_grid(1e-2, 1.0, 8);
  QuadraturePolicy policy;
  policy.density_rel_tol = 1e-2;
  for (auto _ : state)
    benchmark::DoNotOptimize(spectral_density_curve(x, 0, lambdas, policy).values.back());
}
BENCHMARK(BM_DensityCurveTorus)->Unit(benchmark::kMillisecond);

static void BM_FiniteTorsion(benchmark::State &state) {
  const Index n = state.range(0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = Complex(g(rng), g(rng));
  const FiniteComplex x({a});
  for (auto _ : state) benchmark::DoNotOptimize(torsion_finite(x));
}
BENCHMARK(BM_FiniteTorsion)->RangeMultiplier(2)->Range(8, 128);

static void BM_ZetaPipelineExponential(benchmark::State &state) {
  HeatTrace th = HeatTrace::callable([](double t) { return std::exp(-2.0 * t); });
  th.kappas = std::vector<double>{0.0, 1.0};
  const HeatTraceModel m{1, {th, th}, CoeffConvention::standard, false, "exp"};
  for (auto _ : state) benchmark::DoNotOptimize(log_torsion(m).total);
}
BENCHMARK(BM_ZetaPipelineExponential)->Unit(benchmark::kMillisecond);

static void BM_ZetaPipelineFreeSpace(benchmark::State &state) {
  const HeatTraceModel m = free_space_model(3, 1.0);
  for (auto _ : state) {
    double s = 0.0;
    for (int p = 0; p <= 3; ++p) s += small_time_zeta_derivative(m, p).value;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ZetaPipelineFreeSpace)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
