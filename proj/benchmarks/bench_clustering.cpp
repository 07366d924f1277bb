#include <benchmark/benchmark.h>

#include "ovsc/affinity.hpp"
#include "ovsc/pipeline.hpp"
#include "ovsc/speaker_count.hpp"
#include "ovsc/spectral.hpp"
#include "ovsc/synth.hpp"

using namespace ovsc;

namespace {

SynthConversation conversation(int segments, double overlap) {
  SynthConfig cfg;
  cfg.n_speakers = 4;
  cfg.n_segments = segments;
  cfg.overlap_fraction = overlap;
  cfg.seed = 42;
  return generate(cfg);
}

void BM_Affinity(benchmark::State& state) {
  const auto conv = conversation(static_cast<int>(state.range(0)), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(cosine_affinity(conv.embeddings));
}
BENCHMARK(BM_Affinity)->RangeMultiplier(2)->Range(64, 1024);

void BM_SpeakerCount(benchmark::State& state) {
  const auto conv = conversation(static_cast<int>(state.range(0)), 0.0);
  const Matrix a = cosine_affinity(conv.embeddings);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_speakers(a));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SpeakerCount)->RangeMultiplier(2)->Range(64, 512)->Complexity()->Unit(benchmark::kMillisecond);

void BM_Discretize(benchmark::State& state) {
  const auto conv = conversation(static_cast<int>(state.range(0)), 0.2);
  const auto bundle = make_bundle(cosine_affinity(conv.embeddings), 10);
  const auto sol = continuous_solve(bundle.binarized, bundle.degree, 4);
  for (auto _ : state) benchmark::DoNotOptimize(discretize(sol, conv.overlap, {}));
}
BENCHMARK(BM_Discretize)->RangeMultiplier(2)->Range(64, 1024)->Unit(benchmark::kMicrosecond);

void BM_DiarizeRecording(benchmark::State& state) {
  const auto conv = conversation(static_cast<int>(state.range(0)), 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(diarize_recording(conv.embeddings, conv.overlap, {}));
}
BENCHMARK(BM_DiarizeRecording)->Arg(80)->Arg(320)->Unit(benchmark::kMillisecond);

}  // namespace
