#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

struct SynthConfig {
  int n_speakers = 4;
  int dim = 32;
  int n_segments = 80;
  double overlap_fraction = 0.0;
  double noise_sigma = 0.1;
  /// Noise for overlapping segments; defaults to noise_sigma.
  std::optional<double> overlap_sigma;
  double min_centroid_angle = 45.0;  ///< degrees
  std::uint64_t seed = 0;
  double window = 1.5;
  double stride = 0.75;
  std::string recording_id = "synth";

  void validate() const;
};

struct SynthConversation {
  EmbeddingSequence embeddings;
  OverlapVector overlap;
  Timeline reference;
  /// Ground-truth speakers per segment (one entry, or two for overlaps).
  std::vector<std::vector<int>> labels;
  Matrix centroids;
};

/// Reference speaker label for synthetic speaker k.
std::string synth_speaker_name(int k);

/// Seeded synthetic conversation. Every speaker receives an equal share of the
/// segments (±1), arranged as shuffled turns of 1–8 windows; a random subset of
/// overlap_fraction * N segments carries a second, different speaker.
SynthConversation generate(const SynthConfig& cfg);

}  // namespace ovsc
