#include "ovsc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ovsc/error.hpp"
#include "ovsc/ingest.hpp"

namespace ovsc {
namespace {

constexpr int kMaxCentroidAttempts = 100000;
constexpr int kMaxTurn = 8;

Vector random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int j = 0; j < dim; ++j) v(j) = normal(rng);
    norm = v.norm();
  } while (!(norm > 0.0));
  return v / norm;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_speakers < 1) throw ConfigError("synth: need at least one speaker");
  if (dim < 2) throw ConfigError("synth: dim must be >= 2");
  if (n_segments < 1) throw ConfigError("synth: need at least one segment");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) {
    throw ConfigError("synth: overlap fraction must lie in [0, 1)");
  }
  if (overlap_fraction > 0.0 && n_speakers < 2) {
    throw ConfigError("synth: overlaps need at least two speakers");
  }
  if (!(noise_sigma >= 0.0) || (overlap_sigma && !(*overlap_sigma >= 0.0))) {
    throw ConfigError("synth: noise sigma must be non-negative");
  }
  if (!(min_centroid_angle >= 0.0 && min_centroid_angle <= 180.0)) {
    throw ConfigError("synth: centroid angle must lie in [0, 180] degrees");
  }
  if (!(window > 0.0) || !(stride > 0.0)) {
    throw ConfigError("synth: window and stride must be positive");
  }
}

std::string synth_speaker_name(int k) { return "S" + std::to_string(k); }

SynthConversation generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const int k = cfg.n_speakers;
  const int n = cfg.n_segments;

  SynthConversation out;
  out.centroids.resize(k, cfg.dim);
  const double max_cos = std::cos(cfg.min_centroid_angle * std::numbers::pi / 180.0);
  int accepted = 0;
  for (int attempt = 0; accepted < k; ++attempt) {
    if (attempt >= kMaxCentroidAttempts) {
      throw ConfigError("synth: cannot place " + std::to_string(k) + " centroids " +
                        std::to_string(cfg.min_centroid_angle) + " degrees apart in " +
                        std::to_string(cfg.dim) + " dimensions");
    }
    const Vector c = random_unit(rng, cfg.dim);
    bool ok = true;
    for (int j = 0; j < accepted && ok; ++j) ok = out.centroids.row(j).dot(c) <= max_cos;
    if (ok) out.centroids.row(accepted++) = c.transpose();
  }

  // Equal speaker quotas, cut into turns and shuffled.
  std::vector<std::pair<int, int>> turns;
  std::uniform_int_distribution<int> turn_length(1, kMaxTurn);
  for (int s = 0; s < k; ++s) {
    int quota = n / k + (s < n % k ? 1 : 0);
    while (quota > 0) {
      const int len = std::min(quota, turn_length(rng));
      turns.emplace_back(s, len);
      quota -= len;
    }
  }
  std::shuffle(turns.begin(), turns.end(), rng);
  std::vector<int> primary;
  for (const auto& [s, len] : turns) primary.insert(primary.end(), len, s);

  out.overlap = OverlapVector::zeros(static_cast<std::size_t>(n));
  const auto n_overlap = static_cast<std::size_t>(std::lround(cfg.overlap_fraction * n));
  if (n_overlap > 0) {
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n_overlap; ++i) out.overlap.flags[order[i]] = 1;
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, std::max(0, k - 2));
  out.embeddings.vectors.resize(n, cfg.dim);
  out.labels.resize(static_cast<std::size_t>(n));
  out.reference.recording_id = cfg.recording_id;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int a = primary[ui];
    Vector base = out.centroids.row(a).transpose();
    double sigma = cfg.noise_sigma;
    out.labels[ui].push_back(a);
    if (out.overlap.flags[ui]) {
      int b = other(rng);
      if (b >= a) ++b;
      out.labels[ui].push_back(b);
      base = 0.5 * (base + out.centroids.row(b).transpose());
      sigma = cfg.overlap_sigma.value_or(cfg.noise_sigma);
    }
    Vector v;
    do {
      v = base;
      if (sigma > 0.0) {
        for (int j = 0; j < cfg.dim; ++j) v(j) += sigma * normal(rng);
      }
    } while (!(v.norm() > 0.0));
    out.embeddings.vectors.row(i) = (v / v.norm()).transpose();

    SegmentSpan span;
    span.recording_id = cfg.recording_id;
    span.index = ui;
    span.start = i * cfg.stride;
    span.end = span.start + cfg.window;
    out.embeddings.spans.push_back(span);
    for (int s : out.labels[ui]) {
      out.reference.entries.push_back(Interval{synth_speaker_name(s), span.start, span.end});
    }
  }
  out.reference = normalize_timeline(std::move(out.reference));
  return out;
}

}  // namespace ovsc
