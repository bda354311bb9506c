#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace cftv {

/// 64-bit FNV-1a over bytes.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// FNV-1a variant folding eight bytes per step (little-endian words).
/// Used for large payload digests where byte-wise hashing is too slow.
inline std::uint64_t fnv1a64_words(std::span<const std::uint8_t> data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::size_t i = 0;
  for (; i + 8 <= data.size(); i += 8) {
    std::uint64_t w = 0;
    for (int b = 7; b >= 0; --b) w = (w << 8) | data[i + b];
    h ^= w;
    h *= 0x100000001b3ULL;
  }
  for (; i < data.size(); ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  h ^= data.size();
  h *= 0x100000001b3ULL;
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace cftv
