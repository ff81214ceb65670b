// SPDX-License-Identifier: Apache-2.0
//
// 64-bit FNV-1a hashing used for config fingerprints, cache keys and the
// integrity checksum of the binary series container.  The hash is defined
// over bytes, so helpers are provided to feed scalars in a fixed
// (little-endian) byte order regardless of host platform.

#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace ipred {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

class Fnv1a64 {
 public:
  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= static_cast<std::uint64_t>(p[i]);
      state_ *= kFnvPrime;
    }
  }

  void update_u8(std::uint8_t v) { update(&v, 1); }

  void update_u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, sizeof b);
  }

  void update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, sizeof b);
  }

  void update_i64(std::int64_t v) { update_u64(static_cast<std::uint64_t>(v)); }

  void update_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    update_u64(bits);
  }

  void update_str(std::string_view s) {
    update_u64(s.size());
    update(s.data(), s.size());
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kFnvOffsetBasis;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  Fnv1a64 h;
  h.update(data, len);
  return h.digest();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

// Fixed-width lowercase hex, convenient for cache file names.
inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace ipred
