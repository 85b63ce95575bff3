// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "textlime/kernels.hpp"
#include "textlime/surrogate.hpp"
#include "textlime/theory.hpp"
#include "textlime/verify.hpp"

using namespace textlime;

namespace {

Execution mode(const benchmark::State& state) { return state.range(1) == 0 ? Execution::serial : Execution::parallel; }

const LocalEmbedding& embedding() {
  static const LocalEmbedding e = [] {
    std::string text;
    for (int w = 0; w < 40; ++w) text += "w" + std::to_string(w) + (w % 3 == 0 ? " again " : " ");
    Corpus corpus{{tokenize(text), tokenize("w1 w2 w3"), tokenize("again w5")}};
    return LocalEmbedding(corpus.documents[0], IdfTable::fit(corpus));
  }();
  return e;
}

void BM_SampleBatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sample_batch(embedding().d(), n, 0.25, 1, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Responses(benchmark::State& state) {
  const SampleBatch batch = sample_batch(embedding().d(), static_cast<std::size_t>(state.range(0)), 0.25, 2);
  const Model model{LinearModel{std::vector<double>(embedding().d(), 0.3)}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_responses(model, embedding(), batch, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_NormalEquations(benchmark::State& state) {
  const SampleBatch batch = sample_batch(embedding().d(), static_cast<std::size_t>(state.range(0)), 0.25, 3);
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(double(i));
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_normal_equations(batch, y, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ProjectMoments(benchmark::State& state) {
  const SampleBatch batch = sample_batch(embedding().d(), static_cast<std::size_t>(state.range(0)), 0.25, 4);
  std::vector<double> y(batch.size(), 1.0);
  const MomentProjection projection{1.0, -0.1, 0.2, 3.0, -0.1, true};
  for (auto _ : state) benchmark::DoNotOptimize(project_moments(batch, y, projection, mode(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SubsetEnumeration(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<double> omega(d, 1.0 / double(d));
  const std::vector<std::size_t> excluded{0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        enumerate_subset_expectation(omega, excluded, SubsetStatistic::renormalization, mode(state)));
  }
}

void BM_RepeatedRuns(benchmark::State& state) {
  const Model model{IndicatorProduct{{0, 1}, 1.0}};
  const ExplainConfig config{static_cast<std::size_t>(state.range(0)), 0.25, 0.0, 0, mode(state)};
  for (auto _ : state) benchmark::DoNotOptimize(run_repeated(model, embedding(), config, 16, 5, mode(state)));
}

}  // namespace

BENCHMARK(BM_SampleBatch)->ArgsProduct({{5000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Responses)->ArgsProduct({{5000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalEquations)->ArgsProduct({{5000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectMoments)->ArgsProduct({{5000, 100000}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SubsetEnumeration)->ArgsProduct({{14, 18}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RepeatedRuns)->ArgsProduct({{2000}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
