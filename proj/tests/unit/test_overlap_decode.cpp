#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ovsc/error.hpp"
#include "ovsc/overlap_decode.hpp"

using namespace ovsc;

namespace {

constexpr auto S = FrameClass::silence;
constexpr auto G = FrameClass::single;
constexpr auto O = FrameClass::overlap;

FramePosteriors constant_posteriors(std::size_t frames, double shift, double sil, double single,
                                    double ov) {
  FramePosteriors p;
  p.frame_shift = shift;
  p.rows.resize(static_cast<Eigen::Index>(frames), 3);
  for (Eigen::Index t = 0; t < p.rows.rows(); ++t) p.rows.row(t) << sil, single, ov;
  return p;
}

FramePosteriors random_posteriors(std::size_t frames, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.7, 1.0);
  FramePosteriors p;
  p.frame_shift = 1.0;
  p.rows.resize(static_cast<Eigen::Index>(frames), 3);
  for (Eigen::Index t = 0; t < p.rows.rows(); ++t) {
    double a = g(rng) + 1e-6, b = g(rng) + 1e-6, c = g(rng) + 1e-6;
    const double s = a + b + c;
    p.rows.row(t) << a / s, b / s, c / s;
  }
  return p;
}

// Frame-level config with frame_shift = 1 so seconds equal frames.
DurationConfig frame_config(std::size_t min_s, std::optional<std::size_t> max_s, std::size_t min_g,
                            std::optional<std::size_t> max_g, std::size_t min_o,
                            std::optional<std::size_t> max_o) {
  DurationConfig cfg;
  cfg.min_silence = static_cast<double>(min_s);
  cfg.min_single = static_cast<double>(min_g);
  cfg.min_overlap = static_cast<double>(min_o);
  auto conv = [](std::optional<std::size_t> v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  cfg.max_silence = conv(max_s);
  cfg.max_single = conv(max_g);
  cfg.max_overlap = conv(max_o);
  return cfg;
}

std::vector<std::pair<FrameClass, std::size_t>> runs_of(const std::vector<FrameClass>& labels) {
  std::vector<std::pair<FrameClass, std::size_t>> runs;
  for (auto c : labels) {
    if (!runs.empty() && runs.back().first == c) ++runs.back().second;
    else runs.emplace_back(c, 1);
  }
  return runs;
}

}  // namespace

TEST(DurationConfig, Validation) {
  DurationConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.min_overlap = 6.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.min_single = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.bias[1] = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(DurationToFrames, RoundsUpWithSlack) {
  EXPECT_EQ(duration_to_frames(0.03, 0.01), 3u);
  EXPECT_EQ(duration_to_frames(0.1, 0.01), 10u);
  EXPECT_EQ(duration_to_frames(10.0, 0.01), 1000u);
  EXPECT_EQ(duration_to_frames(0.035, 0.01), 4u);
}

TEST(TransitionRule, SilenceAndOverlapNeverAdjacent) {
  EXPECT_FALSE(class_transition_allowed(S, O));
  EXPECT_FALSE(class_transition_allowed(O, S));
  EXPECT_TRUE(class_transition_allowed(S, G));
  EXPECT_TRUE(class_transition_allowed(G, O));
  EXPECT_FALSE(class_transition_allowed(G, G));
}

TEST(BuildDurationHmm, ChainsFollowBounds) {
  DurationConfig cfg;
  const auto hmm = build_duration_hmm(cfg, 0.01);
  EXPECT_EQ(hmm.chain(G).min_frames, 3u);
  EXPECT_EQ(hmm.chain(G).max_frames, std::optional<std::size_t>(1000));
  EXPECT_EQ(hmm.chain(O).min_frames, 10u);
  EXPECT_EQ(hmm.chain(O).length, 500u);
  EXPECT_FALSE(hmm.chain(S).max_frames.has_value());
  EXPECT_TRUE(hmm.states[hmm.chain(S).first + hmm.chain(S).length - 1].self_loop);
  EXPECT_FALSE(hmm.states[hmm.chain(O).first + hmm.chain(O).length - 1].self_loop);

  for (const auto& [from, to] : hmm.arcs()) {
    const auto a = hmm.states[from].cls, b = hmm.states[to].cls;
    EXPECT_FALSE((a == S && b == O) || (a == O && b == S));
    if (a != b) {
      EXPECT_TRUE(hmm.states[from].can_exit);
      EXPECT_EQ(to, hmm.chain(b).first);
    }
  }
  EXPECT_FALSE(hmm.has_arc(hmm.chain(S).first + hmm.chain(S).length - 1, hmm.chain(O).first));
  EXPECT_TRUE(hmm.has_arc(hmm.chain(G).first + 2, hmm.chain(O).first));
  EXPECT_FALSE(hmm.has_arc(hmm.chain(G).first + 1, hmm.chain(O).first));
}

TEST(BuildDurationHmm, RejectsSubFrameMinimum) {
  DurationConfig cfg;
  cfg.min_silence = 0.005;
  EXPECT_THROW(build_duration_hmm(cfg, 0.01), ConfigError);
  EXPECT_THROW(build_duration_hmm(DurationConfig{}, 0.0), ConfigError);
}

TEST(Emission, FloorsAtTinyProbability) {
  EXPECT_EQ(emission_score(0.0, 1.0), std::log(1e-300));
  EXPECT_DOUBLE_EQ(emission_score(0.5, 2.0), 0.0);
}

TEST(Viterbi, AllSinglePosteriors) {
  const auto res = viterbi_decode(constant_posteriors(100, 0.01, 0.0, 1.0, 0.0), {});
  EXPECT_EQ(res.labels.labels, std::vector<FrameClass>(100, G));
  EXPECT_DOUBLE_EQ(res.score, 0.0);
}

TEST(Viterbi, ShortOverlapSpikeIsSmoothed) {
  auto post = constant_posteriors(12, 0.01, 0.05, 0.9, 0.05);
  post.rows.row(5) << 0.01, 0.09, 0.9;
  post.rows.row(6) << 0.01, 0.09, 0.9;
  DurationConfig cfg;  // min_overlap = 0.1 s = 10 frames
  const auto res = viterbi_decode(post, cfg);
  EXPECT_EQ(res.labels.labels, std::vector<FrameClass>(12, G));

  oracle::FrameBounds b;
  b.min = {1, 3, 10};
  b.max = {std::nullopt, 1000, 500};
  const auto best = oracle::exhaustive_decode(post.rows, b, cfg.bias);
  ASSERT_TRUE(best.has_value());
  EXPECT_EQ(best->labels, res.labels.labels);
  EXPECT_EQ(best->score, res.score);
}

TEST(Viterbi, LongOverlapIsKept) {
  auto post = constant_posteriors(40, 0.01, 0.05, 0.9, 0.05);
  for (int t = 10; t < 25; ++t) post.rows.row(t) << 0.05, 0.05, 0.9;
  const auto res = viterbi_decode(post, {});
  const auto regions = overlap_regions(res.labels);
  ASSERT_EQ(regions.size(), 1u);
  EXPECT_NEAR(regions[0].first, 0.10, 1e-12);
  EXPECT_NEAR(regions[0].second, 0.25, 1e-12);
}

TEST(Viterbi, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 10);
  std::uniform_int_distribution<std::size_t> lo(1, 3);
  std::uniform_int_distribution<std::size_t> extra(0, 3);
  std::bernoulli_distribution bounded(0.5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto post = random_posteriors(len(rng), rng);
    oracle::FrameBounds b;
    for (std::size_t c = 0; c < 3; ++c) {
      b.min[c] = lo(rng);
      if (bounded(rng)) b.max[c] = b.min[c] + extra(rng);
    }
    const auto cfg = frame_config(b.min[0], b.max[0], b.min[1], b.max[1], b.min[2], b.max[2]);
    const auto best = oracle::exhaustive_decode(post.rows, b, cfg.bias);
    if (!best) {
      EXPECT_THROW(viterbi_decode(post, cfg), InfeasibleError);
      continue;
    }
    const auto res = viterbi_decode(post, cfg);
    EXPECT_EQ(res.score, best->score) << "trial " << trial;
    EXPECT_TRUE(oracle::runs_feasible(res.labels.labels, b));
    EXPECT_EQ(path_score(post, res.labels.labels, cfg), res.score);
  }
}

TEST(Viterbi, BeatsRandomFeasiblePaths) {
  std::mt19937_64 rng(5);
  const std::size_t frames = 300;
  FramePosteriors post = random_posteriors(frames, rng);
  post.frame_shift = 0.01;
  DurationConfig cfg;
  const auto res = viterbi_decode(post, cfg);
  ASSERT_TRUE(labels_feasible(res.labels.labels, cfg, 0.01));

  // Random feasible paths: runs alternate silence/single or single/overlap.
  std::uniform_int_distribution<int> sil_len(1, 30), single_len(3, 40), ov_len(10, 40);
  int checked = 0;
  while (checked < 1000) {
    std::vector<FrameClass> labels;
    FrameClass cur = G;
    while (labels.size() < frames) {
      const int n = cur == S ? sil_len(rng) : cur == G ? single_len(rng) : ov_len(rng);
      labels.insert(labels.end(), static_cast<std::size_t>(n), cur);
      cur = cur != G ? G : (rng() % 2 ? S : O);
    }
    labels.resize(frames);
    if (!labels_feasible(labels, cfg, 0.01)) continue;
    ++checked;
    EXPECT_GE(res.score, path_score(post, labels, cfg));
  }
}

TEST(Viterbi, BiasShiftsDecisions) {
  const auto post = constant_posteriors(50, 0.01, 0.1, 0.5, 0.4);
  DurationConfig cfg;
  EXPECT_EQ(viterbi_decode(post, cfg).labels.labels, std::vector<FrameClass>(50, G));
  cfg.bias = {1.0, 1.0, 2.0};
  EXPECT_EQ(viterbi_decode(post, cfg).labels.labels, std::vector<FrameClass>(50, O));
}

TEST(Viterbi, TiesPreferEarlierClass) {
  const auto post = constant_posteriors(20, 0.01, 1.0 / 3, 1.0 / 3, 1.0 / 3);
  EXPECT_EQ(viterbi_decode(post, {}).labels.labels, std::vector<FrameClass>(20, S));
}

TEST(Viterbi, InfeasibleLengthThrows) {
  const auto post = constant_posteriors(1, 1.0, 0.2, 0.5, 0.3);
  const auto cfg = frame_config(2, std::nullopt, 2, std::nullopt, 2, std::nullopt);
  EXPECT_THROW(viterbi_decode(post, cfg), InfeasibleError);
}

TEST(Viterbi, DecodedRunsRespectBounds) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    auto post = random_posteriors(500, rng);
    post.frame_shift = 0.01;
    DurationConfig cfg;
    cfg.max_overlap = 0.05 + 0.01 * trial + 0.1;
    const auto res = viterbi_decode(post, cfg);
    for (std::size_t i = 0; i + 1 < res.labels.labels.size(); ++i) {
      EXPECT_TRUE(res.labels.labels[i] == res.labels.labels[i + 1] ||
                  class_transition_allowed(res.labels.labels[i], res.labels.labels[i + 1]));
    }
    for (const auto& [cls, n] : runs_of(res.labels.labels)) {
      const auto& ch = build_duration_hmm(cfg, 0.01).chain(cls);
      EXPECT_GE(n, ch.min_frames);
      if (ch.max_frames) {
        EXPECT_LE(n, *ch.max_frames);
      }
    }
  }
}

TEST(LabelsFeasible, ChecksRunsAndAdjacency) {
  const auto cfg = frame_config(1, std::nullopt, 2, 3, 1, 2);
  EXPECT_TRUE(labels_feasible(std::vector<FrameClass>{S, G, G, O, G, G}, cfg, 1.0));
  EXPECT_FALSE(labels_feasible(std::vector<FrameClass>{S, O, G, G}, cfg, 1.0));
  EXPECT_FALSE(labels_feasible(std::vector<FrameClass>{G, S}, cfg, 1.0));
  EXPECT_FALSE(labels_feasible(std::vector<FrameClass>{G, G, G, G}, cfg, 1.0));
}

TEST(FramesToFlags, HalfCoverageRule) {
  const double shift = 0.01;
  auto labels_with_overlap = [&](std::size_t overlap_frames) {
    FrameLabels l;
    l.frame_shift = shift;
    l.labels.assign(150, G);
    for (std::size_t t = 0; t < overlap_frames; ++t) l.labels[t] = O;
    return l;
  };
  const std::vector<SegmentSpan> span{{"r", 0, 0.0, 1.5}};
  EXPECT_EQ(frames_to_flags(labels_with_overlap(80), span).flags, std::vector<std::uint8_t>{1});
  EXPECT_EQ(frames_to_flags(labels_with_overlap(70), span).flags, std::vector<std::uint8_t>{0});
  EXPECT_EQ(frames_to_flags(labels_with_overlap(75), span).flags, std::vector<std::uint8_t>{1});
  EXPECT_EQ(frames_to_flags(labels_with_overlap(74), span).flags, std::vector<std::uint8_t>{0});
}

TEST(FramesToFlags, OneSecondRegionFlagsMajorityWindow) {
  FrameLabels l;
  l.frame_shift = 0.01;
  l.labels.assign(400, G);
  for (std::size_t t = 100; t < 200; ++t) l.labels[t] = O;  // overlap on [1.0, 2.0)
  const std::vector<SegmentSpan> spans{
      {"r", 0, 0.0, 1.5}, {"r", 1, 0.75, 2.25}, {"r", 2, 1.5, 3.0}, {"r", 3, 2.25, 3.75}};
  EXPECT_EQ(frames_to_flags(l, spans).flags, (std::vector<std::uint8_t>{0, 1, 0, 0}));
}

TEST(FramesToFlags, SpansPastTheEndSeeSilence) {
  FrameLabels l;
  l.frame_shift = 0.01;
  l.labels.assign(100, O);
  EXPECT_EQ(frames_to_flags(l, {{"r", 0, 0.5, 2.0}}).flags, std::vector<std::uint8_t>{0});
  EXPECT_EQ(frames_to_flags(l, {{"r", 0, 0.25, 1.75}}).flags, std::vector<std::uint8_t>{1});
}

TEST(OverlapRegions, MaximalRuns) {
  FrameLabels l;
  l.frame_shift = 0.5;
  l.labels = {G, O, O, G, O, G};
  const auto r = overlap_regions(l);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0].first, 0.5);
  EXPECT_DOUBLE_EQ(r[0].second, 1.5);
  EXPECT_DOUBLE_EQ(r[1].first, 2.0);
}
