#include <benchmark/benchmark.h>

#include <random>

#include "ovsc/overlap_decode.hpp"

using namespace ovsc;

namespace {

FramePosteriors noisy_posteriors(std::size_t frames) {
  std::mt19937_64 rng(7);
  std::gamma_distribution<double> g(0.7, 1.0);
  FramePosteriors p;
  p.frame_shift = 0.01;
  p.rows.resize(static_cast<Eigen::Index>(frames), 3);
  for (Eigen::Index t = 0; t < p.rows.rows(); ++t) {
    const double a = g(rng) + 1e-6, b = g(rng) + 1e-6, c = g(rng) + 1e-6;
    p.rows.row(t) << a / (a + b + c), b / (a + b + c), c / (a + b + c);
  }
  return p;
}

// Default bounds: roughly 1500 states for single + overlap chains at 10 ms.
void BM_Viterbi(benchmark::State& state) {
  const auto post = noisy_posteriors(static_cast<std::size_t>(state.range(0)));
  const DurationConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(post, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Viterbi)->Arg(1000)->Arg(6000)->Arg(30000)->Unit(benchmark::kMillisecond);

void BM_ViterbiShortMaxima(benchmark::State& state) {
  const auto post = noisy_posteriors(static_cast<std::size_t>(state.range(0)));
  DurationConfig cfg;
  cfg.max_single = 1.0;
  cfg.max_overlap = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(post, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ViterbiShortMaxima)->Arg(6000)->Unit(benchmark::kMillisecond);

}  // namespace
