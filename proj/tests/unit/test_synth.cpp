#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "ovsc/affinity.hpp"
#include "ovsc/error.hpp"
#include "ovsc/synth.hpp"

using namespace ovsc;

TEST(Synth, ConfigValidation) {
  SynthConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_speakers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.n_speakers = 1;
  cfg.overlap_fraction = 0.2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.overlap_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dim = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.noise_sigma = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Synth, ImpossibleAngleIsAConfigError) {
  SynthConfig cfg;
  cfg.dim = 2;
  cfg.n_speakers = 5;
  cfg.min_centroid_angle = 100.0;
  EXPECT_THROW(generate(cfg), ConfigError);
}

TEST(Synth, CentroidsAreSeparatedUnitVectors) {
  SynthConfig cfg;
  cfg.n_speakers = 6;
  cfg.seed = 4;
  const auto conv = generate(cfg);
  const double max_cos = std::cos(cfg.min_centroid_angle * std::numbers::pi / 180.0);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(conv.centroids.row(i).norm(), 1.0, 1e-12);
    for (int j = 0; j < i; ++j) EXPECT_LE(conv.centroids.row(i).dot(conv.centroids.row(j)), max_cos + 1e-12);
  }
}

TEST(Synth, LabelsFlagsAndReferenceAgree) {
  SynthConfig cfg;
  cfg.n_speakers = 3;
  cfg.n_segments = 60;
  cfg.overlap_fraction = 0.25;
  cfg.seed = 9;
  const auto conv = generate(cfg);
  ASSERT_EQ(conv.embeddings.size(), 60u);
  EXPECT_EQ(conv.overlap.count(), 15u);
  double expected = 0.0;
  for (std::size_t i = 0; i < 60; ++i) {
    EXPECT_EQ(conv.labels[i].size(), 1u + conv.overlap.flags[i]);
    if (conv.labels[i].size() == 2) {
      EXPECT_NE(conv.labels[i][0], conv.labels[i][1]);
    }
    const auto& s = conv.embeddings.spans[i];
    EXPECT_DOUBLE_EQ(s.start, 0.75 * static_cast<double>(i));
    EXPECT_DOUBLE_EQ(s.duration(), 1.5);
    expected += (1.0 + conv.overlap.flags[i]) * s.duration();
    EXPECT_NEAR(conv.embeddings.vectors.row(static_cast<Eigen::Index>(i)).norm(), 1.0, 1e-12);
  }
  // The reference is merged, so compare each speaker against the union of its windows.
  double raw = 0.0;
  for (int k = 0; k < 3; ++k) {
    std::vector<std::pair<double, double>> windows;
    for (std::size_t i = 0; i < 60; ++i) {
      for (int l : conv.labels[i]) {
        if (l == k) windows.emplace_back(conv.embeddings.spans[i].start, conv.embeddings.spans[i].end);
      }
    }
    raw += 1.5 * static_cast<double>(windows.size());
    double got = 0.0;
    for (const auto& e : conv.reference.entries)
      if (e.speaker == synth_speaker_name(k)) got += e.duration();
    EXPECT_NEAR(got, oracle::union_length(windows), 1e-9);
  }
  EXPECT_DOUBLE_EQ(raw, expected);
  for (const auto& e : conv.reference.entries) EXPECT_EQ(e.speaker[0], 'S');
}

TEST(Synth, BalancedSpeakerShares) {
  SynthConfig cfg;
  cfg.n_speakers = 4;
  cfg.n_segments = 82;
  const auto conv = generate(cfg);
  std::vector<int> counts(4, 0);
  for (const auto& l : conv.labels) ++counts[static_cast<std::size_t>(l[0])];
  for (int c : counts) EXPECT_TRUE(c == 20 || c == 21);
}

TEST(Synth, NoiselessAffinityIsBlockConstant) {
  SynthConfig cfg;
  cfg.n_speakers = 3;
  cfg.n_segments = 30;
  cfg.noise_sigma = 0.0;
  const auto conv = generate(cfg);
  const Matrix a = cosine_affinity(conv.embeddings);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) {
      const double c = conv.centroids.row(conv.labels[i][0]).dot(conv.centroids.row(conv.labels[j][0]));
      EXPECT_NEAR(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), c, 1e-12);
    }
}

TEST(Synth, NoiselessOverlapIsEquidistantFromBothSpeakers) {
  SynthConfig cfg;
  cfg.n_speakers = 3;
  cfg.n_segments = 30;
  cfg.noise_sigma = 0.0;
  cfg.overlap_fraction = 1.0 / 30.0;
  const auto conv = generate(cfg);
  ASSERT_EQ(conv.overlap.count(), 1u);
  const auto i = static_cast<std::size_t>(
      std::find(conv.overlap.flags.begin(), conv.overlap.flags.end(), 1) - conv.overlap.flags.begin());
  const Vector v = conv.embeddings.vectors.row(static_cast<Eigen::Index>(i)).transpose();
  const double ca = v.dot(conv.centroids.row(conv.labels[i][0]).transpose());
  const double cb = v.dot(conv.centroids.row(conv.labels[i][1]).transpose());
  EXPECT_NEAR(ca, cb, 1e-12);
}

TEST(Synth, SeedIsDeterministic) {
  SynthConfig cfg;
  cfg.overlap_fraction = 0.2;
  cfg.seed = 42;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  EXPECT_EQ(a.embeddings.vectors, b.embeddings.vectors);
  EXPECT_EQ(a.overlap.flags, b.overlap.flags);
  EXPECT_EQ(a.reference.entries, b.reference.entries);
  cfg.seed = 43;
  EXPECT_FALSE(generate(cfg).embeddings.vectors == a.embeddings.vectors);
}
