#pragma once

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace phbf {

//! Parameters for index derivation: how many indices per element and the
//! half-open range [0, index_range) they must fall in.
struct HashConfig {
  std::uint32_t index_count = 1;  // k
  std::uint64_t index_range = 1;  // m

  void validate() const {
    if (index_count < 1) throw std::invalid_argument("HashConfig: index_count must be >= 1");
    if (index_range < 1) throw std::invalid_argument("HashConfig: index_range must be >= 1");
  }
};

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

//! Fowler-Noll-Vo 1a hash, 64-bit variant.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> data,
                             std::uint64_t h = kFnvOffsetBasis) {
  for (auto b : data) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

inline std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> digest{};
  SHA256(data.data(), data.size(), digest.data());
  return digest;
}

inline void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

//! Derives cfg.index_count bit-array indices from a byte string. Index i is
//! fnv1a64(sha256(data || be32(i))) mod cfg.index_range, so one digest pair
//! yields arbitrarily many positions and the result is bit-exact across
//! implementations. Indices are not guaranteed pairwise distinct.
inline std::vector<std::uint64_t> derive_indices(std::span<const std::uint8_t> data,
                                                 const HashConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("derive_indices: input must be non-empty");
  std::vector<std::uint8_t> msg(data.begin(), data.end());
  msg.resize(msg.size() + 4);
  std::vector<std::uint64_t> out;
  out.reserve(cfg.index_count);
  for (std::uint32_t i = 0; i < cfg.index_count; ++i) {
    msg[data.size() + 0] = static_cast<std::uint8_t>(i >> 24);
    msg[data.size() + 1] = static_cast<std::uint8_t>(i >> 16);
    msg[data.size() + 2] = static_cast<std::uint8_t>(i >> 8);
    msg[data.size() + 3] = static_cast<std::uint8_t>(i);
    const auto digest = sha256(msg);
    out.push_back(fnv1a64(digest) % cfg.index_range);
  }
  return out;
}

}  // namespace phbf
