#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "ovsc/affinity.hpp"
#include "ovsc/error.hpp"
#include "ovsc/speaker_count.hpp"
#include "ovsc/synth.hpp"

using namespace ovsc;

namespace {

Matrix blocks(const std::vector<int>& sizes) {
  const int n = std::accumulate(sizes.begin(), sizes.end(), 0);
  Matrix a = Matrix::Zero(n, n);
  int off = 0;
  for (int s : sizes) {
    a.block(off, off, s, s).setOnes();
    off += s;
  }
  return a;
}

SpeakerCountConfig sweep(int lo, int hi) {
  SpeakerCountConfig cfg;
  cfg.p_min = lo;
  cfg.p_max = hi;
  return cfg;
}

}  // namespace

TEST(EigengapVector, Examples) {
  EXPECT_EQ(eigengap_vector((Vector(3) << 0, 0, 5).finished()), (Vector(2) << 0, 5).finished());
  EXPECT_EQ(eigengap_vector((Vector(4) << 0, 1, 2, 3).finished()), Vector::Ones(3));
  EXPECT_EQ(eigengap_vector(Vector::Constant(5, 2.5)), Vector::Zero(4));
  EXPECT_THROW(eigengap_vector((Vector(3) << 0, 2, 1).finished()), ContractError);
}

TEST(EstimateSpeakers, TwoBlocksAtFullBlockSize) {
  const auto rep = estimate_speakers(blocks({3, 3}), sweep(3, 3));
  EXPECT_EQ(rep.k_hat, 2);
  EXPECT_NEAR(rep.g[0], 1.0, 1e-9);
  EXPECT_NEAR(rep.r[0], 3.0, 1e-9);
}

// With p = 2 and lower-index ties, each 3-block becomes the path 1 - 0 - 2 with
// weights 1 and 0.5, whose Laplacian spectrum is {0, (3 - sqrt3)/2, (3 + sqrt3)/2}.
// The largest gap (sqrt3) then sits after position 4, and r(2) = 1 + sqrt3 < r(3) = 3.
TEST(EstimateSpeakers, TwoBlocksSweepFollowsClosedForm) {
  const auto rep = estimate_speakers(blocks({3, 3}), sweep(2, 3));
  ASSERT_EQ(rep.p_values, (std::vector<int>{2, 3}));
  const double s3 = std::sqrt(3.0);
  const Vector& lam = rep.eigenvalues[0];
  EXPECT_EQ(lam(0), 0.0);
  EXPECT_EQ(lam(1), 0.0);
  EXPECT_NEAR(lam(2), (3 - s3) / 2, 1e-9);
  EXPECT_NEAR(lam(5), (3 + s3) / 2, 1e-9);
  EXPECT_NEAR(rep.r[0], 1 + s3, 1e-9);
  EXPECT_NEAR(rep.r[1], 3.0, 1e-9);
  EXPECT_EQ(rep.p_hat, 2);
  EXPECT_EQ(rep.k_per_p[1], 2);
  EXPECT_EQ(rep.k_hat, 4);
}

TEST(EstimateSpeakers, ExactBlocksGiveBlockCount) {
  for (int c = 2; c <= 6; ++c) {
    for (int size : {10, 15, 20}) {
      const auto rep = estimate_speakers(blocks(std::vector<int>(static_cast<std::size_t>(c), size)),
                                         sweep(2, 20));
      EXPECT_EQ(rep.k_hat, c) << "c=" << c << " size=" << size;
    }
  }
  EXPECT_EQ(estimate_speakers(blocks({5, 5, 5}), sweep(5, 5)).k_hat, 3);
}

TEST(EstimateSpeakers, ZeroEigenvalueMultiplicityMatchesComponents) {
  const auto rep = estimate_speakers(blocks({4, 6, 5}), sweep(2, 4));
  for (const auto& lam : rep.eigenvalues) {
    EXPECT_EQ((lam.array() == 0.0).count(), 3);
    EXPECT_GE(lam(0), -1e-8);
    for (Eigen::Index i = 1; i < lam.size(); ++i) EXPECT_LE(lam(i - 1), lam(i));
  }
}

TEST(EstimateSpeakers, NoisySynthFourSpeakers) {
  SynthConfig cfg;
  cfg.n_speakers = 4;
  cfg.n_segments = 40;
  cfg.noise_sigma = 0.1;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto conv = generate(cfg);
    const auto rep = estimate_speakers(cosine_affinity(conv.embeddings), sweep(2, 20));
    EXPECT_EQ(rep.k_hat, 4) << "seed " << seed;
  }
}

TEST(EstimateSpeakers, ReportInvariants) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = cosine_affinity(oracle::gaussian(30, 6, rng));
    const auto rep = estimate_speakers(a, sweep(2, 20));
    ASSERT_EQ(rep.r.size(), rep.p_values.size());
    const auto best = rep.index_of_p_hat();
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
      EXPECT_GE(rep.r[i], 0.0);
      EXPECT_LE(rep.r[best], rep.r[i]);
      if (rep.r[i] == rep.r[best]) {
        EXPECT_GE(i, best);
      }
    }
    EXPECT_GE(rep.k_hat, 1);
    EXPECT_LE(rep.k_hat, 30);
  }
}

TEST(EstimateSpeakers, InvariantUnderSimultaneousPermutation) {
  SynthConfig cfg;
  cfg.n_speakers = 3;
  cfg.n_segments = 45;
  std::mt19937_64 rng(17);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const Matrix a = cosine_affinity(generate(cfg).embeddings);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(a.rows());
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + perm.indices().size(), rng);
    const Matrix b = perm * a * perm.transpose();
    EXPECT_EQ(estimate_speakers(a, sweep(2, 20)).k_hat, estimate_speakers(b, sweep(2, 20)).k_hat);
  }
}

TEST(EstimateSpeakers, FlatSpectrumIsIndeterminate) {
  // Identity affinity with p = 1: L = 0, so every gap is zero.
  EXPECT_THROW(estimate_speakers(Matrix::Identity(8, 8), sweep(1, 1)), IndeterminateCountError);
}

TEST(EstimateSpeakers, GapSearchIsLimitedToMaxSpeakers) {
  SynthConfig scfg;
  scfg.n_speakers = 6;
  scfg.n_segments = 120;
  scfg.seed = 3;
  const Matrix a = cosine_affinity(generate(scfg).embeddings);
  SpeakerCountConfig cfg = sweep(2, 20);
  EXPECT_EQ(estimate_speakers(a, cfg).k_hat, 6);
  cfg.max_speakers = 4;
  const auto rep = estimate_speakers(a, cfg);
  EXPECT_LE(rep.k_hat, 4);
  for (const auto k : rep.k_per_p) EXPECT_LE(k, 4);
}

TEST(EstimateSpeakers, ContractChecks) {
  const Matrix a = blocks({3, 3});
  EXPECT_THROW(estimate_speakers(a, sweep(0, 2)), ContractError);
  EXPECT_THROW(estimate_speakers(a, sweep(3, 2)), ContractError);
  EXPECT_THROW(estimate_speakers(a, sweep(2, 7)), ContractError);
  EXPECT_THROW(estimate_speakers(Matrix::Ones(2, 3), sweep(1, 2)), ContractError);
}
