#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phbf {

//! Fixed-length bit string packed most-significant-bit-first within each
//! byte: bit 0 is the top bit of byte 0. Unused tail bits of the last byte
//! are always zero, so the byte image is canonical and can be written to
//! disk as-is.
class BitVector {
 public:
  BitVector() = default;

  explicit BitVector(std::size_t bit_count)
      : bytes_((bit_count + 7) / 8, 0), bit_count_(bit_count) {}

  static BitVector from_bytes(std::span<const std::uint8_t> bytes,
                              std::size_t bit_count) {
    if (bytes.size() != (bit_count + 7) / 8) {
      throw std::invalid_argument("BitVector: byte count does not match bit count");
    }
    BitVector v(bit_count);
    std::copy(bytes.begin(), bytes.end(), v.bytes_.begin());
    if (v.tail_bits() != 0) {
      throw std::invalid_argument("BitVector: nonzero padding bits in last byte");
    }
    return v;
  }

  //! Parses a hex string covering exactly ceil(bit_count/8) bytes.
  static BitVector from_hex(std::string_view hex, std::size_t bit_count) {
    const std::size_t byte_count = (bit_count + 7) / 8;
    if (hex.size() != byte_count * 2) {
      throw std::invalid_argument("BitVector: hex length does not match bit count");
    }
    BitVector v(bit_count);
    for (std::size_t i = 0; i < byte_count; ++i) {
      v.bytes_[i] = static_cast<std::uint8_t>((hex_nibble(hex[2 * i]) << 4) |
                                              hex_nibble(hex[2 * i + 1]));
    }
    if (v.tail_bits() != 0) {
      throw std::invalid_argument("BitVector: nonzero padding bits in last byte");
    }
    return v;
  }

  std::size_t size() const { return bit_count_; }
  bool empty() const { return bit_count_ == 0; }

  bool test(std::size_t i) const {
    check_index(i);
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }

  void set(std::size_t i) {
    check_index(i);
    bytes_[i >> 3] |= static_cast<std::uint8_t>(0x80u >> (i & 7));
  }

  void flip(std::size_t i) {
    check_index(i);
    bytes_[i >> 3] ^= static_cast<std::uint8_t>(0x80u >> (i & 7));
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto b : bytes_) c += static_cast<std::size_t>(std::popcount(b));
    return c;
  }

  std::span<const std::uint8_t> bytes() const { return bytes_; }

  std::string to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes_.size() * 2);
    for (auto b : bytes_) {
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0x0f]);
    }
    return out;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void check_index(std::size_t i) const {
    if (i >= bit_count_) throw std::out_of_range("BitVector: bit index out of range");
  }

  //! Value of the padding bits in the last byte; must stay zero.
  std::uint8_t tail_bits() const {
    if (bit_count_ % 8 == 0 || bytes_.empty()) return 0;
    const auto used = static_cast<unsigned>(bit_count_ % 8);
    return static_cast<std::uint8_t>(bytes_.back() & (0xffu >> used));
  }

  static unsigned hex_nibble(char c) {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
    throw std::invalid_argument("BitVector: malformed hex digit");
  }

  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

}  // namespace phbf
