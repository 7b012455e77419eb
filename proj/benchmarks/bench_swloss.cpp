#include <benchmark/benchmark.h>

#include <random>

#include "swsgd/swloss.hpp"
#include "swsgd/toy.hpp"

using namespace swsgd;

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_WThetaP(benchmark::State& state) {
  Rng rng = make_rng(1);
  const auto n = state.range(0);
  const Matrix x = gaussian(n, 3, rng), y = gaussian(n, 3, rng);
  const Vector th = sample_unit_sphere(3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(w_theta_p(x, y, th, OrderP(1.5)));
  state.SetComplexityN(n);
}
BENCHMARK(BM_WThetaP)->RangeMultiplier(4)->Range(8, 8192)->Complexity(benchmark::oNLogN);

void BM_GradPhi(benchmark::State& state) {
  Rng rng = make_rng(2);
  const int width = static_cast<int>(state.range(0));
  const auto spec = NetworkSpec::dense({4, width, width, 2}, ActivationFn{Activation::tanh}, IndicatorShape{});
  SampleBatch b{gaussian(32, 4, rng), gaussian(32, 2, rng), gaussian(4, 2, rng)};
  b.thetas.rowwise().normalize();
  const Vector u = spec.initial_parameters();
  for (auto _ : state) benchmark::DoNotOptimize(grad_phi(spec, u, b));
}
BENCHMARK(BM_GradPhi)->Arg(8)->Arg(32)->Arg(128);

void BM_GradPhiQuadratic(benchmark::State& state) {
  Rng rng = make_rng(2);
  const int width = static_cast<int>(state.range(0));
  const auto spec = NetworkSpec::dense({4, width, width, 2}, ActivationFn{Activation::tanh}, IndicatorShape{});
  SampleBatch b{gaussian(32, 4, rng), gaussian(32, 2, rng), gaussian(4, 2, rng)};
  b.thetas.rowwise().normalize();
  const Vector u = spec.initial_parameters();
  for (auto _ : state) benchmark::DoNotOptimize(grad_phi_quadratic(spec, u, b));
}
BENCHMARK(BM_GradPhiQuadratic)->Arg(8)->Arg(32)->Arg(128);

void BM_ExhaustiveGradientToy(benchmark::State& state) {
  PopulationMode mode;
  mode.exhaustive = true;
  Rng rng = make_rng(3);
  const auto spec = toy::network();
  const auto mx = toy::inputs(), my = toy::targets();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_population_gradient(spec, toy::start(), mx, my, toy::kBatchSize, mode, rng));
  }
}
BENCHMARK(BM_ExhaustiveGradientToy);

}  // namespace
BENCHMARK_MAIN();
