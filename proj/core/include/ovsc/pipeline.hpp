#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ovsc/affinity.hpp"
#include "ovsc/speaker_count.hpp"
#include "ovsc/spectral.hpp"
#include "ovsc/types.hpp"

namespace ovsc {

struct DiarizeConfig {
  SpeakerCountConfig count;
  DiscretizeConfig discretize;
  /// Skip speaker counting and use this many clusters.
  std::optional<int> num_speakers;
};

/// Everything computed for one recording.
struct DiarizeResult {
  std::string recording_id;
  EigengapReport count;
  bool counted_on_single_rows = false;
  int k = 0;
  AffinityBundle affinity;
  DiscretizeResult discretization;
  Timeline hypothesis;
};

/// affinity -> speaker count -> relaxed solution -> discretization -> timeline
/// for a single recording. An empty or all-zero overlap vector gives the
/// classical single-label clustering.
DiarizeResult diarize_recording(const EmbeddingSequence& embeddings, const OverlapVector& overlap,
                                const DiarizeConfig& cfg);

}  // namespace ovsc
