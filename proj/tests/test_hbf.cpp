#include "phbf/hbf.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "phbf/eval.hpp"

namespace {

using phbf::fp_match_probability;
using phbf::HbfParams;
using phbf::HierarchicalFilter;
using phbf::Signature;
using phbf::tune_threshold;
using phbf::eval::random_signature;
using phbf::eval::SplitMix64;

HbfParams reference_params(std::uint64_t capacity, double fp = 0.1) {
  return HbfParams::sized_for(16, 16, capacity, fp, 5);
}

TEST(HbfParams, SizedForDerivesClassicalValues) {
  const auto p = reference_params(100);
  EXPECT_EQ(p.filter_bits, 480u);
  EXPECT_EQ(p.hash_count, 3u);
  EXPECT_EQ(p.signature_bits(), 256u);
  EXPECT_THROW((HbfParams{16, 16, 100, 3, 17}.validate()), std::invalid_argument);
}

TEST(Hbf, EnrollThenExactReplayMatchesEveryBlock) {
  HierarchicalFilter h(reference_params(10));
  SplitMix64 rng(1);
  const Signature s = random_signature(256, rng);
  h.enroll(s);
  EXPECT_EQ(h.match_count(s), 16u);
  EXPECT_TRUE(h.query(s));
  EXPECT_EQ(h.enrolled_count(), 1u);
}

TEST(Hbf, EmptyFilterMatchesNothing) {
  HierarchicalFilter h(reference_params(10));
  SplitMix64 rng(2);
  EXPECT_EQ(h.match_count(random_signature(256, rng)), 0u);
}

TEST(Hbf, WrongSignatureLengthRejected) {
  HierarchicalFilter h(reference_params(10));
  SplitMix64 rng(3);
  EXPECT_THROW(h.enroll(random_signature(128, rng)), std::invalid_argument);
  EXPECT_THROW(h.match_count(random_signature(255, rng)), std::invalid_argument);
}

TEST(Hbf, BlockPositionIsSalted) {
  // Two signatures sharing block content at different positions must not
  // match through each other.
  HbfParams p = reference_params(10);
  Signature a(p.signature_bits());
  Signature b(p.signature_bits());
  for (std::uint32_t bit = 0; bit < 16; ++bit) {
    a.set(bit);        // block 0 of a = all ones pattern
    b.set(16 + bit);   // block 1 of b = same pattern, shifted one block
  }
  HierarchicalFilter h(p);
  h.enroll(a);
  // b agrees with a on no block position: block 0 differs (b zero, a ones),
  // block 1 differs (b ones, a zero), the rest are equal zeros.
  EXPECT_EQ(h.match_count(b), 14u);
}

TEST(Hbf, CorruptedBlocksLeaveRestMatching) {
  HierarchicalFilter h(reference_params(10));
  SplitMix64 rng(4);
  const Signature s = random_signature(256, rng);
  h.enroll(s);
  Signature noisy = s;
  for (std::uint32_t bit = 0; bit < 32; ++bit) noisy.flip(bit);  // blocks 0 and 1
  EXPECT_GE(h.match_count(noisy), 14u);
}

// Guaranteed budget: damage confined to at most N - th blocks can never
// drop an enrolled signature below the threshold.
TEST(Hbf, NoiseBudgetAlwaysAccepted) {
  const HbfParams p = reference_params(50);
  HierarchicalFilter h(p);
  SplitMix64 rng(5);
  std::vector<Signature> enrolled;
  for (int i = 0; i < 50; ++i) {
    enrolled.push_back(random_signature(256, rng));
    h.enroll(enrolled.back());
  }
  const std::uint32_t budget = p.block_count - p.threshold;
  for (int trial = 0; trial < 500; ++trial) {
    Signature noisy = enrolled[rng.below(enrolled.size())];
    const std::uint32_t damaged = rng.below(budget + 1);
    std::vector<std::uint32_t> blocks(p.block_count);
    for (std::uint32_t j = 0; j < p.block_count; ++j) blocks[j] = j;
    for (std::uint32_t j = 0; j < damaged; ++j) {
      std::swap(blocks[j], blocks[j + rng.below(p.block_count - j)]);
      const std::uint32_t base = blocks[j] * p.block_bits;
      for (std::uint32_t bit = 0; bit < p.block_bits; ++bit) {
        if (rng.next() & 1) noisy.flip(base + bit);
      }
    }
    EXPECT_TRUE(h.query(noisy)) << "trial " << trial;
  }
}

TEST(Hbf, MatchCountMonotoneInEnrollment) {
  HierarchicalFilter h(reference_params(50));
  SplitMix64 rng(6);
  const Signature probe = random_signature(256, rng);
  std::uint32_t last = h.match_count(probe);
  for (int i = 0; i < 50; ++i) {
    h.enroll(random_signature(256, rng));
    const std::uint32_t now = h.match_count(probe);
    EXPECT_GE(now, last);
    last = now;
  }
}

// Fresh random probes against a loaded filter collect ~ N * fp block hits.
TEST(Hbf, FreshProbeMatchCountNearBlockFpRate) {
  HierarchicalFilter h(reference_params(100));
  SplitMix64 rng(7);
  for (int i = 0; i < 100; ++i) h.enroll(random_signature(256, rng));
  std::uint64_t total = 0;
  const int probes = 5000;
  for (int i = 0; i < probes; ++i) total += h.match_count(random_signature(256, rng));
  const double mean = static_cast<double>(total) / probes;
  EXPECT_GE(mean, 0.5 * 16 * 0.1);
  EXPECT_LE(mean, 1.5 * 16 * 0.1);
}

// With p = 0.02 per-bit noise, a block of 16 bits survives with
// probability 0.98^16, so ~11.6 of 16 blocks stay clean on average.
TEST(Hbf, UniformNoiseMeanMatchCount) {
  HierarchicalFilter h(reference_params(10));
  SplitMix64 rng(8);
  const Signature s = random_signature(256, rng);
  h.enroll(s);
  std::uint64_t total = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const Signature noisy =
        phbf::eval::apply_noise(s, phbf::eval::UniformNoise{0.02}, rng.next());
    total += h.match_count(noisy);
  }
  const double mean = static_cast<double>(total) / trials;
  EXPECT_GE(mean, 11.0);
  EXPECT_LE(mean, 13.0);
}

TEST(Hbf, FullThresholdRejectsAllFreshProbes) {
  HbfParams p = HbfParams::sized_for(16, 16, 1000, 0.1, 16);
  HierarchicalFilter h(p);
  SplitMix64 rng(9);
  for (int i = 0; i < 1000; ++i) h.enroll(random_signature(256, rng));
  int accepted = 0;
  for (int i = 0; i < 10000; ++i) accepted += h.query(random_signature(256, rng)) ? 1 : 0;
  EXPECT_EQ(accepted, 0);
}

TEST(Hbf, ZeroThresholdAcceptsEverything) {
  HbfParams p = reference_params(10);
  p.threshold = 0;
  HierarchicalFilter h(p);
  SplitMix64 rng(10);
  EXPECT_TRUE(h.query(random_signature(256, rng)));
}

TEST(FpMatch, FrozenReferenceValue) {
  // Frozen from an exact-rational direct summation computed independently.
  EXPECT_NEAR(fp_match_probability(8, 4, 3, 0.1), 0.14489235618858767, 1e-13);
}

TEST(FpMatch, BoundaryIdentities) {
  EXPECT_DOUBLE_EQ(fp_match_probability(8, 8, 3, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(fp_match_probability(16, 16, 1, 0.9), 1.0);
  for (std::uint32_t nt = 0; nt < 8; ++nt) {
    EXPECT_DOUBLE_EQ(fp_match_probability(8, nt, 3, 0.0), 0.0);
  }
}

TEST(FpMatch, MonotoneInThresholdAndBounded) {
  for (double p : {0.0, 0.05, 0.1, 0.3, 1.0}) {
    double last = -1.0;
    for (std::uint32_t nt = 0; nt <= 16; ++nt) {
      const double v = fp_match_probability(16, nt, 3, p);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      EXPECT_GE(v, last);
      last = v;
    }
  }
}

TEST(FpMatch, InvalidInputsRejected) {
  EXPECT_THROW(fp_match_probability(8, 9, 3, 0.1), std::invalid_argument);
  EXPECT_THROW(fp_match_probability(8, 4, 0, 0.1), std::invalid_argument);
  EXPECT_THROW(fp_match_probability(8, 4, 3, -0.1), std::invalid_argument);
  EXPECT_THROW(fp_match_probability(8, 4, 3, 1.1), std::invalid_argument);
  EXPECT_THROW(fp_match_probability(0, 0, 3, 0.1), std::invalid_argument);
}

TEST(TuneThreshold, ScanMatchesFrozenOracle) {
  // Direct summation gives 0.9202 at N_t = 7 as the first value >= 0.9.
  EXPECT_EQ(tune_threshold(8, 3, 0.1, 0.9), 7u);
}

TEST(TuneThreshold, ZeroFillNeedsFullCount) {
  EXPECT_EQ(tune_threshold(8, 3, 0.0, 0.999), 8u);
}

TEST(TuneThreshold, TargetMustBeOpenInterval) {
  EXPECT_THROW(tune_threshold(8, 3, 0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(tune_threshold(8, 3, 0.1, 1.0), std::invalid_argument);
}

TEST(TuneThreshold, ResultSatisfiesTargetAndPredecessorDoesNot) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t n = 4 + static_cast<std::uint32_t>(gen() % 13);
    const std::uint32_t k = 1 + static_cast<std::uint32_t>(gen() % 5);
    const double p = static_cast<double>(gen() % 1000) / 1000.0;
    const double target = 0.05 + 0.9 * static_cast<double>(gen() % 1000) / 1000.0;
    const std::uint32_t nt = tune_threshold(n, k, p, target);
    EXPECT_GE(fp_match_probability(n, nt, k, p), target);
    if (nt > 0) EXPECT_LT(fp_match_probability(n, nt - 1, k, p), target);
  }
}

}  // namespace
