#pragma once

#include <array>
#include <bit>
#include <cstdint>

namespace ccs {

inline constexpr int kCodeBits = 128;
inline constexpr int kSubCodes = 8;    // m
inline constexpr int kSubCodeBits = 16;  // b

// 128-bit binary hash code, partitioned into 8 sub-codes of 16 bits.
// Global bit i lives at bit (i % 64) of words[i / 64]; equivalently bit j of
// sub-code k is global bit k*16 + j. Serializing the two words little-endian
// therefore stores bit i at byte i/8, bit position i%8.
struct BinaryCode {
  std::array<std::uint64_t, 2> words{0, 0};

  bool bit(int i) const {
    return (words[static_cast<unsigned>(i) >> 6] >> (i & 63)) & 1u;
  }

  void set_bit(int i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words[static_cast<unsigned>(i) >> 6] |= mask;
    else
      words[static_cast<unsigned>(i) >> 6] &= ~mask;
  }

  // k in [0, 8)
  std::uint16_t subcode(int k) const {
    return static_cast<std::uint16_t>(words[k >> 2] >> ((k & 3) * 16));
  }

  friend bool operator==(const BinaryCode&, const BinaryCode&) = default;
};

inline int hamming(const BinaryCode& a, const BinaryCode& b) {
  return std::popcount(a.words[0] ^ b.words[0]) +
         std::popcount(a.words[1] ^ b.words[1]);
}

}  // namespace ccs
