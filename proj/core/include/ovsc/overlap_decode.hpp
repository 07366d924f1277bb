#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ovsc/types.hpp"

namespace ovsc {

/// Duration bounds in seconds; an empty maximum means unbounded.
struct DurationConfig {
  double min_silence = 0.01;
  std::optional<double> max_silence;
  double min_single = 0.03;
  std::optional<double> max_single = 10.0;
  double min_overlap = 0.1;
  std::optional<double> max_overlap = 5.0;
  /// Multiplicative posterior weights, indexed by FrameClass.
  std::array<double, kNumFrameClasses> bias{1.0, 1.0, 1.0};

  /// Throws ConfigError on non-positive minima, min > max or non-positive bias.
  void validate() const;
};

struct FrameLabels {
  std::vector<FrameClass> labels;
  double frame_shift = 0.01;
};

/// Silence and overlap may never be adjacent.
constexpr bool class_transition_allowed(FrameClass from, FrameClass to) {
  if (from == to) return false;
  return !((from == FrameClass::silence && to == FrameClass::overlap) ||
           (from == FrameClass::overlap && to == FrameClass::silence));
}

/// Frame count for a duration, rounding up (1e-9 s slack absorbs float dust).
std::size_t duration_to_frames(double seconds, double frame_shift);

/// Left-to-right duration HMM. Class c owns a chain of states; state j of the
/// chain means "the current run has lasted j + 1 frames". The last state of an
/// unbounded class loops on itself.
struct DurationHmm {
  struct State {
    FrameClass cls;
    std::size_t position;  ///< 0-based position in the class chain
    bool can_exit;         ///< run length has reached the minimum
    bool self_loop;
  };
  struct ClassChain {
    std::size_t first = 0;  ///< index of the entry state
    std::size_t length = 0;
    std::size_t min_frames = 0;
    std::optional<std::size_t> max_frames;
  };

  std::vector<State> states;
  std::array<ClassChain, kNumFrameClasses> chains;

  std::size_t size() const noexcept { return states.size(); }
  const ClassChain& chain(FrameClass c) const { return chains[static_cast<std::size_t>(c)]; }

  /// Every arc (from, to) of the graph: chain advances, self loops and exits
  /// into the entry states of permitted classes.
  std::vector<std::pair<std::size_t, std::size_t>> arcs() const;
  bool has_arc(std::size_t from, std::size_t to) const;
};

DurationHmm build_duration_hmm(const DurationConfig& cfg, double frame_shift);

/// log(max(bias * p, 1e-300)).
double emission_score(double posterior, double bias);

/// Sum of emission scores along `labels`.
double path_score(const FramePosteriors& posteriors, std::span<const FrameClass> labels,
                  const DurationConfig& cfg);

struct ViterbiResult {
  FrameLabels labels;
  double score = 0.0;
};

/// Most likely duration-feasible label sequence. Throws InfeasibleError when no
/// path satisfies the duration bounds for this many frames.
ViterbiResult viterbi_decode(const FramePosteriors& posteriors, const DurationConfig& cfg);

/// True when every run satisfies its duration bounds and no silence/overlap
/// pair is adjacent.
bool labels_feasible(std::span<const FrameClass> labels, const DurationConfig& cfg,
                     double frame_shift);

/// flag_i = 1 iff overlap-labelled time inside span i is at least half of it.
/// Frame t covers [t * shift, (t + 1) * shift); spans past the last frame see silence.
OverlapVector frames_to_flags(const FrameLabels& labels, const std::vector<SegmentSpan>& spans);

/// Maximal runs of `overlap` as (start, end) seconds.
std::vector<std::pair<double, double>> overlap_regions(const FrameLabels& labels);

}  // namespace ovsc
