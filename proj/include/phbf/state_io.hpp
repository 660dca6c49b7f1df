#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "phbf/supply_chain.hpp"

namespace phbf::io {

// State file layout, version 1. All integers little-endian.
//   magic   "PHBF" (4 bytes)
//   version u8 = 1
//   header  T, g, L, N, block_bits, m, k, th  (8 x u64)
//   names   u64 count (= L), then per name: u64 byte length + UTF-8 bytes
//   payload raw bit arrays, ceil(m/8) bytes each, MSB-first:
//           per location (listed order), nodes 1..u (level order),
//           block filters 0..N-1; then marking_set; then binding_filter
//           blocks 0..N-1; then sold_filter blocks 0..N-1.
inline constexpr std::array<char, 4> kMagic = {'P', 'H', 'B', 'F'};
inline constexpr std::uint8_t kVersion = 1;

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> buf;
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf.data(), buf.size());
}

inline std::uint64_t get_u64(std::istream& in) {
  std::array<char, 8> buf;
  if (!in.read(buf.data(), buf.size())) {
    throw std::runtime_error("state file truncated");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
  }
  return v;
}

inline void put_bits(std::ostream& out, const BitVector& bits) {
  const auto bytes = bits.bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline void get_bits(std::istream& in, BloomFilter& filter) {
  std::vector<std::uint8_t> bytes((filter.bit_count() + 7) / 8);
  if (!in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    throw std::runtime_error("state file truncated");
  }
  filter.load_bits(BitVector::from_bytes(bytes, filter.bit_count()));
}

inline void put_hbf(std::ostream& out, const HierarchicalFilter& hbf) {
  for (std::uint32_t j = 0; j < hbf.params().block_count; ++j) {
    put_bits(out, hbf.block_filter(j).bits());
  }
}

inline void get_hbf(std::istream& in, HierarchicalFilter& hbf) {
  for (std::uint32_t j = 0; j < hbf.params().block_count; ++j) {
    get_bits(in, hbf.block_filter(j));
  }
}

}  // namespace detail

inline void save_chain(std::ostream& out, const SupplyChain& chain) {
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  const auto& tree = chain.tree();
  const auto& p = chain.params();
  detail::put_u64(out, tree.total_days());
  detail::put_u64(out, tree.granularity());
  detail::put_u64(out, chain.locations().size());
  detail::put_u64(out, p.block_count);
  detail::put_u64(out, p.block_bits);
  detail::put_u64(out, p.filter_bits);
  detail::put_u64(out, p.hash_count);
  detail::put_u64(out, p.threshold);
  detail::put_u64(out, chain.locations().size());
  for (const auto& name : chain.locations()) {
    detail::put_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (std::size_t i = 0; i < chain.locations().size(); ++i) {
    const auto& filter = chain.location_filter(i);
    for (std::uint64_t node = 1; node <= tree.node_count(); ++node) {
      detail::put_hbf(out, filter.node(node));
    }
  }
  detail::put_bits(out, chain.marking_set().bits());
  detail::put_hbf(out, chain.binding_filter());
  detail::put_hbf(out, chain.sold_filter());
  if (!out) throw std::runtime_error("failed to write state");
}

inline SupplyChain load_chain(std::istream& in) {
  std::array<char, 4> magic;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a PHBF state file (bad magic)");
  }
  const int version = in.get();
  if (version != kVersion) {
    throw std::runtime_error("unsupported state file version " + std::to_string(version));
  }
  const std::uint64_t total_days = detail::get_u64(in);
  const std::uint64_t granularity = detail::get_u64(in);
  const std::uint64_t location_count = detail::get_u64(in);
  HbfParams params;
  params.block_count = static_cast<std::uint32_t>(detail::get_u64(in));
  params.block_bits = static_cast<std::uint32_t>(detail::get_u64(in));
  params.filter_bits = detail::get_u64(in);
  params.hash_count = static_cast<std::uint32_t>(detail::get_u64(in));
  params.threshold = static_cast<std::uint32_t>(detail::get_u64(in));

  const std::uint64_t name_count = detail::get_u64(in);
  if (name_count != location_count) {
    throw std::runtime_error("state file location table does not match header");
  }
  std::vector<std::string> locations;
  locations.reserve(location_count);
  for (std::uint64_t i = 0; i < location_count; ++i) {
    const std::uint64_t len = detail::get_u64(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), static_cast<std::streamsize>(len))) {
      throw std::runtime_error("state file truncated");
    }
    locations.push_back(std::move(name));
  }

  const TimeTree tree(total_days, granularity);
  SupplyChain chain(std::move(locations), tree, params);
  for (std::size_t i = 0; i < chain.locations().size(); ++i) {
    auto& filter = chain.location_filter(i);
    for (std::uint64_t node = 1; node <= tree.node_count(); ++node) {
      detail::get_hbf(in, filter.node(node));
    }
  }
  detail::get_bits(in, chain.marking_set());
  detail::get_hbf(in, chain.binding_filter());
  detail::get_hbf(in, chain.sold_filter());
  return chain;
}

inline void save_chain_file(const std::filesystem::path& path, const SupplyChain& chain) {
  // Write to a sibling temp file first so a failed save never corrupts an
  // existing state.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    save_chain(out, chain);
  }
  std::filesystem::rename(tmp, path);
}

inline SupplyChain load_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open state file " + path.string());
  return load_chain(in);
}

inline std::string to_bytes(const SupplyChain& chain) {
  std::ostringstream out(std::ios::binary);
  save_chain(out, chain);
  return std::move(out).str();
}

}  // namespace phbf::io
