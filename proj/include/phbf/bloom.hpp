#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>

#include "phbf/bits.hpp"
#include "phbf/hashing.hpp"

namespace phbf {

//! Plain Bloom filter over byte strings: m bits, k derived indices per
//! element, one-sided error (no false negatives). Single writer, any number
//! of concurrent readers while no insert is in progress; callers enforce.
class BloomFilter {
 public:
  BloomFilter(std::uint64_t bit_count, std::uint32_t hash_count)
      : cfg_{hash_count, bit_count}, bits_(bit_count) {
    cfg_.validate();
  }

  //! k = max(1, round((m/n) ln 2)), rounding half away from zero.
  static std::uint32_t optimal_k(std::uint64_t m, std::uint64_t n) {
    if (m < 1 || n < 1) throw std::invalid_argument("optimal_k: m and n must be >= 1");
    const double raw = (static_cast<double>(m) / static_cast<double>(n)) * std::numbers::ln2;
    const auto k = std::llround(raw);
    return k < 1 ? 1u : static_cast<std::uint32_t>(k);
  }

  //! m = ceil(-n ln(fp) / (ln 2)^2), the classical sizing identity.
  static std::uint64_t size_for_fp(std::uint64_t n, double fp) {
    if (n < 1) throw std::invalid_argument("size_for_fp: n must be >= 1");
    if (!(fp > 0.0) || !(fp < 1.0)) {
      throw std::invalid_argument("size_for_fp: fp must lie in (0, 1)");
    }
    const double m = std::ceil(-static_cast<double>(n) * std::log(fp) /
                               (std::numbers::ln2 * std::numbers::ln2));
    return static_cast<std::uint64_t>(m);
  }

  void insert(std::span<const std::uint8_t> data) {
    for (auto idx : derive_indices(data, cfg_)) bits_.set(idx);
    ++insert_count_;
  }

  bool contains(std::span<const std::uint8_t> data) const {
    for (auto idx : derive_indices(data, cfg_)) {
      if (!bits_.test(idx)) return false;
    }
    return true;
  }

  //! popcount/m: the empirical estimate of the set-bit probability p_BF
  //! consumed by threshold tuning.
  double fill_probability() const {
    return static_cast<double>(bits_.popcount()) / static_cast<double>(bit_count());
  }

  std::uint64_t bit_count() const { return cfg_.index_range; }
  std::uint32_t hash_count() const { return cfg_.index_count; }
  //! Insertions performed on this in-memory instance (not persisted).
  std::uint64_t insert_count() const { return insert_count_; }

  const BitVector& bits() const { return bits_; }

  //! Replaces the bit array, e.g. when loading a state file. The source
  //! must have exactly bit_count() bits.
  void load_bits(BitVector bits) {
    if (bits.size() != bit_count()) {
      throw std::invalid_argument("BloomFilter: bit array size mismatch");
    }
    bits_ = std::move(bits);
  }

 private:
  HashConfig cfg_;
  BitVector bits_;
  std::uint64_t insert_count_ = 0;
};

}  // namespace phbf
