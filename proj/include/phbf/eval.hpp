#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "phbf/hbf.hpp"
#include "phbf/phbf.hpp"
#include "phbf/temporal.hpp"

namespace phbf::eval {

//! SplitMix64 (Steele, Lea & Flood; the java.util.SplittableRandom mixer).
//! Chosen because the full stream is reproducible from the seed with a few
//! lines of code in any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  //! Uniform in [0, bound) by modulo; bias is negligible for the bounds
  //! used here and the rule is trivial to reproduce elsewhere.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("SplitMix64: zero bound");
    return next() % bound;
  }

  //! Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

//! Random signature of `bit_count` bits: byte i is the low byte of the
//! i-th generator draw; tail padding bits are cleared.
inline Signature random_signature(std::size_t bit_count, SplitMix64& rng) {
  if (bit_count == 0) throw std::invalid_argument("random_signature: zero length");
  std::vector<std::uint8_t> bytes((bit_count + 7) / 8);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.next() & 0xff);
  if (bit_count % 8 != 0) {
    bytes.back() &= static_cast<std::uint8_t>(0xff00u >> (bit_count % 8));
  }
  return Signature::from_bytes(bytes, bit_count);
}

//! Deterministic population of uniformly random signatures.
inline std::vector<Signature> generate_population(std::size_t count, std::size_t bit_count,
                                                  std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_population: count must be >= 1");
  SplitMix64 rng(seed);
  std::vector<Signature> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_signature(bit_count, rng));
  return out;
}

//! Each bit flips independently with probability `flip_probability`.
struct UniformNoise {
  double flip_probability = 0.0;
};

//! `bursts` non-overlapping runs of `burst_length` contiguous bits, placed
//! uniformly; every bit inside a run flips.
struct ClusteredNoise {
  std::uint32_t bursts = 1;
  std::uint32_t burst_length = 1;
};

using NoiseModel = std::variant<UniformNoise, ClusteredNoise>;

inline Signature apply_noise(const Signature& s, const NoiseModel& model,
                             std::uint64_t seed) {
  SplitMix64 rng(seed);
  Signature out = s;
  if (const auto* uniform = std::get_if<UniformNoise>(&model)) {
    const double p = uniform->flip_probability;
    if (!(p >= 0.0) || !(p <= 1.0)) {
      throw std::invalid_argument("apply_noise: flip probability out of [0, 1]");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (rng.next_unit() < p) out.flip(i);
    }
    return out;
  }
  const auto& clustered = std::get<ClusteredNoise>(model);
  const std::uint64_t bursts = clustered.bursts;
  const std::uint64_t len = clustered.burst_length;
  if (bursts * len > s.size()) {
    throw std::invalid_argument("apply_noise: bursts do not fit into the signature");
  }
  if (bursts == 0 || len == 0) return out;
  // Stars-and-bars placement: sorted offsets into the free space, shifted
  // by one burst length each, give non-overlapping runs.
  const std::uint64_t free_space = s.size() - bursts * len;
  std::vector<std::uint64_t> offsets(bursts);
  for (auto& o : offsets) o = rng.below(free_space + 1);
  std::sort(offsets.begin(), offsets.end());
  for (std::uint64_t b = 0; b < bursts; ++b) {
    const std::uint64_t start = offsets[b] + b * len;
    for (std::uint64_t i = 0; i < len; ++i) out.flip(start + i);
  }
  return out;
}

//! One row of the threshold sweep.
struct RocPoint {
  std::uint32_t threshold;
  double tpr;
  double fpr;
};

struct RocConfig {
  std::uint64_t total_days = 128;
  std::uint64_t granularity = 16;
  HbfParams hbf;
};

//! Enrolls the population into a fresh PHBF at uniformly random days, then
//! probes it with noisy replays (queried over their true leaf range, the
//! hardest correct range) and fresh impostor signatures (queried over a
//! random leaf range). Returns (th, tpr, fpr) for every th in 0..N.
inline std::vector<RocPoint> roc_sweep(const std::vector<Signature>& population,
                                       const NoiseModel& genuine_noise,
                                       std::size_t impostor_count, const RocConfig& cfg,
                                       std::uint64_t seed) {
  if (population.empty()) throw std::invalid_argument("roc_sweep: empty population");
  const TimeTree tree(cfg.total_days, cfg.granularity);
  PersistentFilter filter(tree, cfg.hbf);
  SplitMix64 rng(seed);

  std::vector<std::uint64_t> days;
  days.reserve(population.size());
  for (const auto& s : population) {
    const std::uint64_t day = 1 + rng.below(tree.total_days());
    filter.enroll(s, day);
    days.push_back(day);
  }

  const auto max_match = [&](const Signature& s, std::uint64_t day) {
    const Interval leaf = tree.interval(tree.leaf_index(day));
    std::uint32_t best = 0;
    for (const auto& nm : filter.match_report(s, leaf.start, leaf.end)) {
      best = std::max(best, nm.match_count);
    }
    return best;
  };

  std::vector<std::uint32_t> genuine_scores;
  genuine_scores.reserve(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    const Signature probe = apply_noise(population[i], genuine_noise, rng.next());
    genuine_scores.push_back(max_match(probe, days[i]));
  }

  std::vector<std::uint32_t> impostor_scores;
  impostor_scores.reserve(impostor_count);
  for (std::size_t i = 0; i < impostor_count; ++i) {
    const Signature probe = random_signature(cfg.hbf.signature_bits(), rng);
    impostor_scores.push_back(max_match(probe, 1 + rng.below(tree.total_days())));
  }

  std::vector<RocPoint> points;
  points.reserve(cfg.hbf.block_count + 1);
  for (std::uint32_t th = 0; th <= cfg.hbf.block_count; ++th) {
    const auto accepted = [th](const std::vector<std::uint32_t>& scores) {
      std::size_t n = 0;
      for (auto s : scores) n += (s >= th) ? 1 : 0;
      return n;
    };
    const double tpr = static_cast<double>(accepted(genuine_scores)) /
                       static_cast<double>(genuine_scores.size());
    const double fpr = impostor_scores.empty()
                           ? 0.0
                           : static_cast<double>(accepted(impostor_scores)) /
                                 static_cast<double>(impostor_scores.size());
    points.push_back({th, tpr, fpr});
  }
  return points;
}

}  // namespace phbf::eval
