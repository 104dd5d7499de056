#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "sedkit/median_filter.h"
#include "sedkit/psds.h"
#include "sedkit/sampling.h"

using namespace sedkit;

namespace {

struct Dataset {
  std::vector<ClipScores> scores;
  GroundTruth gt;
};

Dataset make_dataset(std::size_t clips, std::size_t classes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  const auto vocab = make_vocabulary(names);
  Dataset d;
  for (std::size_t k = 0; k < clips; ++k) {
    const std::string id = "clip" + std::to_string(k);
    Matrix m(250, classes);
    auto& events = d.gt[id];
    for (std::size_t c = 0; c < classes; ++c) {
      const auto on = static_cast<std::size_t>(u(rng) * 200);
      events.push_back({c, on * 0.04, (on + 25) * 0.04});
      for (std::size_t t = 0; t < 250; ++t) {
        const bool inside = t >= on && t < on + 25;
        m(t, c) = std::round((inside ? 0.4 + 0.6 * u(rng) : 0.7 * u(rng)) * 1e4) / 1e4;
      }
    }
    d.scores.push_back({id, ScoreMatrix(FrameGrid(0.04, 250), vocab, m)});
  }
  return d;
}

void BM_Psds(benchmark::State& state) {
  const auto d = make_dataset(static_cast<std::size_t>(state.range(0)), 10);
  PsdsParams p;
  for (auto _ : state) benchmark::DoNotOptimize(psds(d.scores, d.gt, p).psds);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Psds)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MedianFilter(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(250);
  for (double& v : x) v = u(rng);
  const auto window = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(median_filter_column(x, window));
}
BENCHMARK(BM_MedianFilter)->Arg(13)->Arg(51);

void BM_WeightedSample(benchmark::State& state) {
  std::vector<std::string> ids;
  std::vector<double> w;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < state.range(0); ++i) {
    ids.push_back(std::to_string(i));
    w.push_back(u(rng));
  }
  const SamplingWeights weights(ids, w);
  for (auto _ : state) benchmark::DoNotOptimize(weighted_sample_indices(weights, 100000, 4));
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_WeightedSample)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
