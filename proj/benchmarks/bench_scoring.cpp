#include <benchmark/benchmark.h>

#include <random>

#include "ovsc/ingest.hpp"
#include "ovsc/scoring.hpp"

using namespace ovsc;

namespace {

Timeline random_timeline(int speakers, int intervals, const std::string& prefix, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(0.0, 3600.0), len(0.5, 20.0);
  std::uniform_int_distribution<int> spk(0, speakers - 1);
  Timeline t{"rec", {}};
  for (int i = 0; i < intervals; ++i) {
    const double s = start(rng);
    t.entries.push_back({prefix + std::to_string(spk(rng)), s, s + len(rng)});
  }
  return normalize_timeline(t);
}

void BM_DerScore(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ref = random_timeline(8, n, "r", 1);
  const auto hyp = random_timeline(10, n, "h", 2);
  for (auto _ : state) benchmark::DoNotOptimize(der_score(ref, hyp));
}
BENCHMARK(BM_DerScore)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_DerScoreCollar(benchmark::State& state) {
  const auto ref = random_timeline(8, 1000, "r", 1);
  const auto hyp = random_timeline(10, 1000, "h", 2);
  for (auto _ : state) benchmark::DoNotOptimize(der_score(ref, hyp, 0.25));
}
BENCHMARK(BM_DerScoreCollar)->Unit(benchmark::kMillisecond);

}  // namespace
