#include "lyapcert/analyze.hpp"
#include "lyapcert/certify.hpp"
#include "lyapcert/model.hpp"
#include "lyapcert/simulate.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace lyapcert;

MethodRepresentation make(Family f, const std::vector<double>& params, const std::vector<FunctionClass>& classes) {
  MethodRepresentation rep = zoo_build(f, params, classes);
  return normalized(rep, validate(rep));
}

MethodRepresentation gradient() { return make(Family::heavy_ball, {0.1, 0.0}, {{1, 10}}); }

MethodRepresentation chambolle_pock() {
  return make(Family::chambolle_pock, {1.0, 0.99, 1.0}, {{0, kInf}, {0, kInf}});
}

void BM_Validate(benchmark::State& state) {
  const std::vector<double> params = {0.5, 1.0};
  const std::vector<FunctionClass> classes = {{0, kInf}, {0, 1}, {0, kInf}};
  const MethodRepresentation rep = zoo_build(Family::davis_yin, params, classes);
  for (auto _ : state) benchmark::DoNotOptimize(validate(rep));
}
BENCHMARK(BM_Validate);

void BM_FeasibilityGradient(benchmark::State& state) {
  const auto rep = gradient();
  const auto lb = certify::preset({certify::PresetKind::distance_to_solution, 1}, rep);
  for (auto _ : state) benchmark::DoNotOptimize(analyze::check_rate(rep, lb, 0.85));
}
BENCHMARK(BM_FeasibilityGradient)->Unit(benchmark::kMillisecond);

void BM_FeasibilityChambollePock(benchmark::State& state) {
  const auto rep = chambolle_pock();
  const auto lb = certify::preset({certify::PresetKind::distance_to_solution, 1}, rep);
  for (auto _ : state) benchmark::DoNotOptimize(analyze::check_rate(rep, lb, 0.95));
}
BENCHMARK(BM_FeasibilityChambollePock)->Unit(benchmark::kMillisecond);

void BM_BisectGradient(benchmark::State& state) {
  const auto rep = gradient();
  for (auto _ : state)
    benchmark::DoNotOptimize(analyze::bisect_rho(rep, certify::Preset{certify::PresetKind::distance_to_solution, 1}));
}
BENCHMARK(BM_BisectGradient)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto rep = chambolle_pock();
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  const auto inst = simulate::random_instances(rep, d, rng);
  const Vec x0 = Vec::Ones(static_cast<Eigen::Index>(rep.n * d));
  for (auto _ : state) benchmark::DoNotOptimize(simulate::run(rep, inst, x0, 200));
}
BENCHMARK(BM_Simulate)->Arg(2)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
