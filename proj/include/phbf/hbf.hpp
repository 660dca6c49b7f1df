#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "phbf/bits.hpp"
#include "phbf/bloom.hpp"
#include "phbf/hashing.hpp"

namespace phbf {

//! A PUF-derived signature: a fixed-length bit string.
using Signature = BitVector;

//! Shape of a hierarchical filter: N block filters of m bits / k hashes
//! each, and the count of matching blocks required to accept a query.
struct HbfParams {
  std::uint32_t block_count = 16;  // N
  std::uint32_t block_bits = 16;   // bits per signature block
  std::uint64_t filter_bits = 1;   // m per block filter
  std::uint32_t hash_count = 1;    // k per block filter
  std::uint32_t threshold = 5;     // th, in [0, N]

  std::size_t signature_bits() const {
    return static_cast<std::size_t>(block_count) * block_bits;
  }

  void validate() const {
    if (block_count < 1) throw std::invalid_argument("HbfParams: block_count must be >= 1");
    if (block_bits < 1) throw std::invalid_argument("HbfParams: block_bits must be >= 1");
    if (filter_bits < 1) throw std::invalid_argument("HbfParams: filter_bits must be >= 1");
    if (hash_count < 1) throw std::invalid_argument("HbfParams: hash_count must be >= 1");
    if (threshold > block_count) {
      throw std::invalid_argument("HbfParams: threshold must lie in [0, block_count]");
    }
  }

  //! Derives (m, k) from an expected capacity and per-filter false positive
  //! target, keeping the remaining fields as given.
  static HbfParams sized_for(std::uint32_t block_count, std::uint32_t block_bits,
                             std::uint64_t capacity, double fp_target,
                             std::uint32_t threshold) {
    const auto m = BloomFilter::size_for_fp(capacity, fp_target);
    return HbfParams{block_count, block_bits, m, BloomFilter::optimal_k(m, capacity),
                     threshold};
  }

  friend bool operator==(const HbfParams&, const HbfParams&) = default;
};

//! Noise-tolerant signature membership. The signature is split into N equal
//! contiguous blocks; block j is enrolled into a positionally dedicated
//! Bloom filter with j salted into the hashed message, so equal block
//! values at different positions stay distinct. A query is accepted when at
//! least `threshold` blocks test positive, which tolerates arbitrary bit
//! damage confined to at most N - threshold blocks.
class HierarchicalFilter {
 public:
  explicit HierarchicalFilter(HbfParams params) : params_(params) {
    params_.validate();
    filters_.reserve(params_.block_count);
    for (std::uint32_t j = 0; j < params_.block_count; ++j) {
      filters_.emplace_back(params_.filter_bits, params_.hash_count);
    }
  }

  const HbfParams& params() const { return params_; }
  std::uint64_t enrolled_count() const { return enrolled_; }

  //! Enrolls every block of `s`. A non-empty salt binds the enrollment to
  //! extra context (e.g. a chip marking) by mixing it into every block's
  //! hashed message.
  void enroll(const Signature& s, std::span<const std::uint8_t> salt = {}) {
    check_signature(s);
    for (std::uint32_t j = 0; j < params_.block_count; ++j) {
      filters_[j].insert(block_message(j, s, salt));
    }
    ++enrolled_;
  }

  //! Number of blocks of `s` that test positive in their dedicated filter.
  std::uint32_t match_count(const Signature& s,
                            std::span<const std::uint8_t> salt = {}) const {
    check_signature(s);
    std::uint32_t matches = 0;
    for (std::uint32_t j = 0; j < params_.block_count; ++j) {
      if (filters_[j].contains(block_message(j, s, salt))) ++matches;
    }
    return matches;
  }

  bool query(const Signature& s, std::span<const std::uint8_t> salt = {}) const {
    return match_count(s, salt) >= params_.threshold;
  }

  //! Fill probability of the fullest block filter; the conservative p_BF
  //! estimate for threshold tuning.
  double max_fill_probability() const {
    double worst = 0.0;
    for (const auto& f : filters_) worst = std::max(worst, f.fill_probability());
    return worst;
  }

  BloomFilter& block_filter(std::uint32_t j) { return filters_.at(j); }
  const BloomFilter& block_filter(std::uint32_t j) const { return filters_.at(j); }

 private:
  void check_signature(const Signature& s) const {
    if (s.size() != params_.signature_bits()) {
      throw std::invalid_argument("HierarchicalFilter: signature length mismatch");
    }
  }

  //! Hashed message for block j: be32(j) || be32(|salt|) || salt ||
  //! be32(block_bits) || block bits packed MSB-first with zero tail padding.
  //! The length fields keep the encoding prefix-free.
  std::vector<std::uint8_t> block_message(std::uint32_t j, const Signature& s,
                                          std::span<const std::uint8_t> salt) const {
    const std::uint32_t bits = params_.block_bits;
    std::vector<std::uint8_t> msg;
    msg.reserve(12 + salt.size() + (bits + 7) / 8);
    append_be32(msg, j);
    append_be32(msg, static_cast<std::uint32_t>(salt.size()));
    msg.insert(msg.end(), salt.begin(), salt.end());
    append_be32(msg, bits);
    const std::size_t base = static_cast<std::size_t>(j) * bits;
    std::uint8_t acc = 0;
    for (std::uint32_t b = 0; b < bits; ++b) {
      acc = static_cast<std::uint8_t>(acc | (s.test(base + b) ? (0x80u >> (b & 7)) : 0u));
      if ((b & 7) == 7) {
        msg.push_back(acc);
        acc = 0;
      }
    }
    if (bits % 8 != 0) msg.push_back(acc);
    return msg;
  }

  HbfParams params_;
  std::vector<BloomFilter> filters_;
  std::uint64_t enrolled_ = 0;
};

//! Probability that a non-enrolled signature matches at most `threshold`
//! blocks, as a function of the per-bit fill probability p_BF:
//!   sum_{i=0}^{th} C(N, i) (1 - p)^{k i} (1 - (1 - p)^k)^{N - i}
inline double fp_match_probability(std::uint32_t block_count, std::uint32_t threshold,
                                   std::uint32_t hash_count, double fill_probability) {
  if (block_count < 1 || hash_count < 1) {
    throw std::invalid_argument("fp_match_probability: N and k must be >= 1");
  }
  if (threshold > block_count) {
    throw std::invalid_argument("fp_match_probability: threshold must lie in [0, N]");
  }
  if (!(fill_probability >= 0.0) || !(fill_probability <= 1.0)) {
    throw std::invalid_argument("fp_match_probability: p_BF must lie in [0, 1]");
  }
  // The partial sum at th = N is the full binomial expansion.
  if (threshold == block_count) return 1.0;
  const double clear = std::pow(1.0 - fill_probability, static_cast<double>(hash_count));
  double sum = 0.0;
  double comb = 1.0;  // C(N, i), exact in double for the N used here
  for (std::uint32_t i = 0; i <= threshold; ++i) {
    sum += comb * std::pow(clear, static_cast<double>(i)) *
           std::pow(1.0 - clear, static_cast<double>(block_count - i));
    comb = comb * static_cast<double>(block_count - i) / static_cast<double>(i + 1);
  }
  return std::min(sum, 1.0);
}

//! Smallest threshold whose fp_match_probability reaches `target`, scanning
//! 0..N; N always qualifies since the full sum is 1.
inline std::uint32_t tune_threshold(std::uint32_t block_count, std::uint32_t hash_count,
                                    double fill_probability, double target) {
  if (!(target > 0.0) || !(target < 1.0)) {
    throw std::invalid_argument("tune_threshold: target must lie in (0, 1)");
  }
  for (std::uint32_t nt = 0; nt <= block_count; ++nt) {
    if (fp_match_probability(block_count, nt, hash_count, fill_probability) >= target) {
      return nt;
    }
  }
  return block_count;
}

}  // namespace phbf
