#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ovsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One sliding-window segment of a recording.
struct SegmentSpan {
  std::string recording_id;
  /// Ordinal of the row in the file it was loaded from.
  std::size_t index = 0;
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
};

/// N segment embeddings with their time spans. Row i of `vectors` belongs to `spans[i]`.
struct EmbeddingSequence {
  std::vector<SegmentSpan> spans;
  Matrix vectors;

  std::size_t size() const noexcept { return spans.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors.cols()); }
};

/// Per-segment overlap decisions; 1 means the segment carries two speakers.
struct OverlapVector {
  std::vector<std::uint8_t> flags;

  static OverlapVector zeros(std::size_t n) { return {std::vector<std::uint8_t>(n, 0)}; }
  std::size_t size() const noexcept { return flags.size(); }
  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto f : flags) c += f != 0;
    return c;
  }
  bool any() const noexcept { return count() > 0; }
};

struct Interval {
  std::string speaker;
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Speaker-attributed intervals of one recording.
struct Timeline {
  std::string recording_id;
  std::vector<Interval> entries;

  /// Sum of interval durations (speaker-time, overlaps counted per speaker).
  double speaker_time() const noexcept {
    double t = 0.0;
    for (const auto& e : entries) t += e.duration();
    return t;
  }
};

}  // namespace ovsc

namespace ovsc {

/// N x K binary cluster assignment; row i sums to 1 + overlap.flags[i].
struct AssignmentMatrix {
  Matrix x;
  OverlapVector overlap;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

enum class FrameClass : std::uint8_t { silence = 0, single = 1, overlap = 2 };

inline constexpr std::size_t kNumFrameClasses = 3;

/// T x 3 per-frame class posteriors, columns ordered (silence, single, overlap).
struct FramePosteriors {
  std::string recording_id;
  double frame_shift = 0.01;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> rows;

  std::size_t frames() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

}  // namespace ovsc
