#include <benchmark/benchmark.h>

#include <cmath>

#include "shrinker/analysis.hpp"
#include "shrinker/energy.hpp"
#include "shrinker/flow.hpp"
#include "shrinker/physical.hpp"

using namespace shrinker;

namespace {

NormalSection perturbation(const ModelPtr& model) {
  NormalSection v = NormalSection::zero(model);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double a = model->angles()[j];
    v.values[j] = 0.05 * std::cos(2 * a) + (model->kind() == ShrinkerKind::circle
                                                 ? 0.03 * std::sin(3 * a)
                                                 : 0.03 * std::cos(3 * a));
  }
  return v;
}

ModelPtr model_for(const benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  return state.range(1) == 1 ? make_shrinker(ShrinkerKind::circle, 1, nodes)
                             : make_shrinker(ShrinkerKind::round_sphere, 2, nodes);
}

void BM_EmbedGraph(benchmark::State& state) {
  const auto v = perturbation(model_for(state));
  for (auto _ : state) benchmark::DoNotOptimize(embed_graph(v));
}
BENCHMARK(BM_EmbedGraph)->Args({512, 1})->Args({256, 2});

void BM_EvaluateGraph(benchmark::State& state) {
  const auto v = perturbation(model_for(state));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_graph(v));
}
BENCHMARK(BM_EvaluateGraph)->Args({128, 1})->Args({512, 1})->Args({2048, 1})->Args({256, 2});

void BM_RescaledSteps(benchmark::State& state) {
  const auto v = perturbation(model_for(state));
  RescaledOptions o;
  o.dtau = 1e-4;
  o.tau_max = 0.01;  // 100 steps
  o.conv_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(run_rescaled(v, o));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RescaledSteps)->Args({512, 1})->Args({256, 2})->Unit(benchmark::kMillisecond);

void BM_PhysicalStep(benchmark::State& state) {
  const auto s = embed_graph(perturbation(model_for(state)));
  for (auto _ : state) benchmark::DoNotOptimize(physical_step(s, 1e-5));
}
BENCHMARK(BM_PhysicalStep)->Args({512, 1})->Args({256, 2});

void BM_RadialSection(benchmark::State& state) {
  const auto model = model_for(state);
  const auto s = embed_graph(perturbation(model));
  for (auto _ : state) benchmark::DoNotOptimize(radial_section(s, {0.0, 0.0}, 1.0, model));
}
BENCHMARK(BM_RadialSection)->Args({512, 1})->Args({256, 2});

void BM_SelfIntersection(benchmark::State& state) {
  const auto s = embed_graph(perturbation(model_for(state)));
  const auto polygon = s.closed_polygon();
  for (auto _ : state) benchmark::DoNotOptimize(self_intersects(polygon));
}
BENCHMARK(BM_SelfIntersection)->Args({512, 1})->Args({4096, 1});

void BM_LojasiewiczFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> tau(n), gap(n), grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    tau[i] = 0.5 + 10.0 * static_cast<double>(i) / static_cast<double>(n);
    gap[i] = std::exp(-2.0 * tau[i]);
    grad[i] = std::sqrt(2.0) * std::exp(-tau[i]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_lojasiewicz(tau, gap, grad));
}
BENCHMARK(BM_LojasiewiczFit)->Arg(10'000)->Arg(100'000);

}  // namespace

BENCHMARK_MAIN();
