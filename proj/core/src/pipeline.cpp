#include "ovsc/pipeline.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "ovsc/error.hpp"
#include "ovsc/ingest.hpp"

namespace ovsc {
namespace {

// Speakers are counted on single-speaker rows when enough of them exist:
// overlapped embeddings of the same pair form clusters of their own.
constexpr std::size_t kMinRowsForCounting = 3;

}  // namespace

DiarizeResult diarize_recording(const EmbeddingSequence& embeddings, const OverlapVector& overlap,
                                const DiarizeConfig& cfg) {
  const auto n = embeddings.size();
  if (n == 0) throw ContractError("diarize: recording has no segments");
  if (static_cast<std::size_t>(embeddings.vectors.rows()) != n) {
    throw ContractError("diarize: span count does not match embedding rows");
  }
  const OverlapVector flags = overlap.size() == 0 ? OverlapVector::zeros(n) : overlap;
  if (flags.size() != n) {
    throw ContractError("diarize: " + std::to_string(flags.size()) + " overlap flags for " +
                        std::to_string(n) + " segments");
  }
  if (cfg.num_speakers && *cfg.num_speakers < 1) {
    throw ContractError("diarize: number of speakers must be >= 1");
  }

  DiarizeResult result;
  result.recording_id = embeddings.spans.front().recording_id;
  const Matrix affinity = cosine_affinity(embeddings);

  int p = static_cast<int>(n);
  int k = 1;
  if (n < 3) {
    spdlog::warn("diarize: {} has only {} segment(s); assuming a single speaker",
                 result.recording_id, n);
  } else {
    std::vector<Eigen::Index> rows;
    if (flags.any()) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!flags.flags[i]) rows.push_back(static_cast<Eigen::Index>(i));
      }
    }
    Matrix counted = affinity;
    if (rows.size() >= kMinRowsForCounting) {
      counted = affinity(rows, rows);
      result.counted_on_single_rows = true;
    }
    SpeakerCountConfig count_cfg = cfg.count;
    const int rows_used = static_cast<int>(counted.rows());
    count_cfg.p_max = std::min(count_cfg.p_max, rows_used - 1);
    count_cfg.p_min = std::clamp(count_cfg.p_min, 1, count_cfg.p_max);
    result.count = estimate_speakers(counted, count_cfg);
    p = result.count.p_hat;
    k = result.count.k_hat;
    if (flags.any() && k < 2) {
      spdlog::info("diarize: overlap flags present, raising speaker count from {} to 2", k);
      k = 2;
    }
  }
  if (cfg.num_speakers) k = *cfg.num_speakers;
  k = std::min(k, static_cast<int>(n));
  result.k = k;

  result.affinity = make_bundle(affinity, p);
  const auto solution = continuous_solve(result.affinity.binarized, result.affinity.degree, k);
  const auto zero_rows = (solution.x_tilde.rowwise().squaredNorm().array() == 0.0).count();
  if (zero_rows > 0) {
    spdlog::warn("diarize: {} segment(s) have no weight in the {}-dimensional eigenspace",
                 zero_rows, k);
  }
  result.discretization = discretize(solution, flags, cfg.discretize);
  result.hypothesis = assignment_to_timeline(result.discretization.assignment, embeddings.spans);
  result.hypothesis.recording_id = result.recording_id;
  return result;
}

}  // namespace ovsc
