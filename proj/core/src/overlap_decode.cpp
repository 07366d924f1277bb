#include "ovsc/overlap_decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "ovsc/error.hpp"

namespace ovsc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::array<FrameClass, kNumFrameClasses> kClasses{
    FrameClass::silence, FrameClass::single, FrameClass::overlap};

std::size_t idx(FrameClass c) { return static_cast<std::size_t>(c); }

const char* class_name(FrameClass c) {
  switch (c) {
    case FrameClass::silence: return "silence";
    case FrameClass::single: return "single";
    case FrameClass::overlap: return "overlap";
  }
  return "?";
}

struct Bounds {
  double min;
  std::optional<double> max;
};

Bounds bounds_of(const DurationConfig& cfg, FrameClass c) {
  switch (c) {
    case FrameClass::silence: return {cfg.min_silence, cfg.max_silence};
    case FrameClass::single: return {cfg.min_single, cfg.max_single};
    case FrameClass::overlap: return {cfg.min_overlap, cfg.max_overlap};
  }
  return {};
}

}  // namespace

void DurationConfig::validate() const {
  for (auto c : kClasses) {
    const auto b = bounds_of(*this, c);
    if (!(b.min > 0.0) || !std::isfinite(b.min)) {
      throw ConfigError(std::string("minimum ") + class_name(c) + " duration must be positive");
    }
    if (b.max && !(*b.max >= b.min)) {
      throw ConfigError(std::string("minimum ") + class_name(c) +
                        " duration exceeds its maximum");
    }
    if (!(bias[idx(c)] > 0.0) || !std::isfinite(bias[idx(c)])) {
      throw ConfigError(std::string(class_name(c)) + " bias must be positive and finite");
    }
  }
}

std::size_t duration_to_frames(double seconds, double frame_shift) {
  const double frames = std::ceil(seconds / frame_shift - 1e-9);
  return static_cast<std::size_t>(std::max(1.0, frames));
}

std::vector<std::pair<std::size_t, std::size_t>> DurationHmm::arcs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& st = states[s];
    const auto& ch = chain(st.cls);
    if (st.position + 1 < ch.length) out.emplace_back(s, s + 1);
    if (st.self_loop) out.emplace_back(s, s);
    if (st.can_exit) {
      for (auto to : kClasses) {
        if (class_transition_allowed(st.cls, to)) out.emplace_back(s, chain(to).first);
      }
    }
  }
  return out;
}

bool DurationHmm::has_arc(std::size_t from, std::size_t to) const {
  const auto all = arcs();
  return std::find(all.begin(), all.end(), std::pair{from, to}) != all.end();
}

DurationHmm build_duration_hmm(const DurationConfig& cfg, double frame_shift) {
  if (!(frame_shift > 0.0) || !std::isfinite(frame_shift)) {
    throw ConfigError("frame shift must be positive");
  }
  cfg.validate();
  DurationHmm hmm;
  for (auto c : kClasses) {
    const auto b = bounds_of(cfg, c);
    if (b.min < frame_shift - 1e-12) {
      throw ConfigError(std::string("minimum ") + class_name(c) + " duration " +
                        std::to_string(b.min) + "s is shorter than one frame");
    }
    auto& ch = hmm.chains[idx(c)];
    ch.first = hmm.states.size();
    ch.min_frames = duration_to_frames(b.min, frame_shift);
    if (b.max) {
      ch.max_frames = std::max(ch.min_frames, duration_to_frames(*b.max, frame_shift));
      ch.length = *ch.max_frames;
    } else {
      ch.length = ch.min_frames;
    }
    for (std::size_t j = 0; j < ch.length; ++j) {
      hmm.states.push_back(DurationHmm::State{
          c, j, j + 1 >= ch.min_frames, !b.max && j + 1 == ch.length});
    }
  }
  return hmm;
}

double emission_score(double posterior, double bias) {
  return std::log(std::max(bias * posterior, 1e-300));
}

double path_score(const FramePosteriors& posteriors, std::span<const FrameClass> labels,
                  const DurationConfig& cfg) {
  if (labels.size() != posteriors.frames()) {
    throw ContractError("path_score: label count differs from frame count");
  }
  double score = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto c = idx(labels[t]);
    score += emission_score(posteriors.rows(static_cast<Eigen::Index>(t),
                                            static_cast<Eigen::Index>(c)),
                            cfg.bias[c]);
  }
  return score;
}

ViterbiResult viterbi_decode(const FramePosteriors& posteriors, const DurationConfig& cfg) {
  const auto frames = posteriors.frames();
  if (frames == 0) throw ContractError("viterbi_decode: no frames");
  const auto hmm = build_duration_hmm(cfg, posteriors.frame_shift);
  const auto n_states = hmm.size();

  auto emit = [&](std::size_t t, FrameClass c) {
    return emission_score(posteriors.rows(static_cast<Eigen::Index>(t),
                                          static_cast<Eigen::Index>(idx(c))),
                          cfg.bias[idx(c)]);
  };

  // Backpointers, per frame and class. entry_from: class whose exit fed the
  // entry state (-1 unreachable, 3 = own self loop); tail_self: the tail state
  // came from its own self loop; exit_state: best exit-eligible state of each
  // class at the previous frame.
  constexpr std::int8_t kFromSelf = 3;
  std::vector<std::array<std::int8_t, kNumFrameClasses>> entry_from(frames);
  std::vector<std::array<std::uint8_t, kNumFrameClasses>> tail_self(frames);
  std::vector<std::array<std::uint32_t, kNumFrameClasses>> exit_state(frames);

  std::vector<double> delta(n_states, kNegInf);
  std::vector<double> next(n_states, kNegInf);
  for (auto c : kClasses) {
    delta[hmm.chain(c).first] = emit(0, c);
    entry_from[0][idx(c)] = -1;
  }

  for (std::size_t t = 1; t < frames; ++t) {
    std::array<double, kNumFrameClasses> best_exit{kNegInf, kNegInf, kNegInf};
    for (auto c : kClasses) {
      const auto& ch = hmm.chain(c);
      std::uint32_t arg = static_cast<std::uint32_t>(ch.first);
      for (std::size_t s = ch.first; s < ch.first + ch.length; ++s) {
        if (hmm.states[s].can_exit && delta[s] > best_exit[idx(c)]) {
          best_exit[idx(c)] = delta[s];
          arg = static_cast<std::uint32_t>(s);
        }
      }
      exit_state[t][idx(c)] = arg;
    }

    for (auto c : kClasses) {
      const auto& ch = hmm.chain(c);
      const double e = emit(t, c);
      for (std::size_t j = 0; j < ch.length; ++j) {
        const auto s = ch.first + j;
        double best = kNegInf;
        std::int8_t from = -1;
        std::uint8_t self = 0;
        if (j > 0) {
          best = delta[s - 1];
        }
        if (hmm.states[s].self_loop && delta[s] > best) {
          best = delta[s];
          self = 1;
          from = kFromSelf;
        }
        if (j == 0) {
          for (auto prev : kClasses) {
            if (class_transition_allowed(prev, c) && best_exit[idx(prev)] > best) {
              best = best_exit[idx(prev)];
              from = static_cast<std::int8_t>(idx(prev));
            }
          }
          entry_from[t][idx(c)] = from;
        } else if (hmm.states[s].self_loop) {
          tail_self[t][idx(c)] = self;
        }
        next[s] = best == kNegInf ? kNegInf : best + e;
      }
    }
    std::swap(delta, next);
  }

  std::size_t final_state = n_states;
  double final_score = kNegInf;
  for (std::size_t s = 0; s < n_states; ++s) {
    if (hmm.states[s].can_exit && delta[s] > final_score) {
      final_score = delta[s];
      final_state = s;
    }
  }
  if (final_state == n_states) {
    throw InfeasibleError("no label sequence of " + std::to_string(frames) +
                          " frames satisfies the duration constraints");
  }

  ViterbiResult result;
  result.score = final_score;
  result.labels.frame_shift = posteriors.frame_shift;
  result.labels.labels.resize(frames);
  auto s = final_state;
  for (std::size_t t = frames; t-- > 0;) {
    const auto& st = hmm.states[s];
    result.labels.labels[t] = st.cls;
    if (t == 0) break;
    const auto c = idx(st.cls);
    if (st.position == 0) {
      const auto from = entry_from[t][c];
      if (from == kFromSelf) continue;
      if (from < 0) throw NumericalError("viterbi_decode: broken backpointer");
      s = exit_state[t][static_cast<std::size_t>(from)];
    } else if (st.self_loop && tail_self[t][c]) {
      continue;
    } else {
      s = s - 1;
    }
  }
  return result;
}

bool labels_feasible(std::span<const FrameClass> labels, const DurationConfig& cfg,
                     double frame_shift) {
  std::size_t i = 0;
  while (i < labels.size()) {
    auto j = i;
    while (j < labels.size() && labels[j] == labels[i]) ++j;
    const auto b = bounds_of(cfg, labels[i]);
    const auto run = j - i;
    if (run < duration_to_frames(b.min, frame_shift)) return false;
    if (b.max && run > duration_to_frames(*b.max, frame_shift)) return false;
    if (j < labels.size() && !class_transition_allowed(labels[i], labels[j])) return false;
    i = j;
  }
  return true;
}

OverlapVector frames_to_flags(const FrameLabels& labels, const std::vector<SegmentSpan>& spans) {
  const double shift = labels.frame_shift;
  if (!(shift > 0.0)) throw ContractError("frames_to_flags: frame shift must be positive");
  const auto frames = labels.labels.size();
  const double covered_until = static_cast<double>(frames) * shift;
  OverlapVector out = OverlapVector::zeros(spans.size());
  std::size_t padded = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& sp = spans[i];
    if (sp.end > covered_until + 1e-9) ++padded;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(sp.start / shift)));
    const auto last = std::min(frames, static_cast<std::size_t>(std::ceil(sp.end / shift)) + 1);
    double covered = 0.0;
    for (std::size_t t = first; t < last; ++t) {
      if (labels.labels[t] != FrameClass::overlap) continue;
      const double lo = std::max(sp.start, static_cast<double>(t) * shift);
      const double hi = std::min(sp.end, static_cast<double>(t + 1) * shift);
      if (hi > lo) covered += hi - lo;
    }
    out.flags[i] = covered >= 0.5 * sp.duration() - 1e-9 ? 1 : 0;
  }
  if (padded > 0) {
    spdlog::warn("frames_to_flags: {} segment(s) extend past the last frame; treated as silence",
                 padded);
  }
  return out;
}

std::vector<std::pair<double, double>> overlap_regions(const FrameLabels& labels) {
  std::vector<std::pair<double, double>> out;
  const auto& l = labels.labels;
  std::size_t i = 0;
  while (i < l.size()) {
    auto j = i;
    while (j < l.size() && l[j] == l[i]) ++j;
    if (l[i] == FrameClass::overlap) {
      out.emplace_back(static_cast<double>(i) * labels.frame_shift,
                       static_cast<double>(j) * labels.frame_shift);
    }
    i = j;
  }
  return out;
}

}  // namespace ovsc
