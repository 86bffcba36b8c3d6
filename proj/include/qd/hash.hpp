#pragma once

// FNV-1a 64-bit, used for file checksums, config hashes and trajectory
// fingerprints. Not cryptographic, just stable and fast.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>

namespace qd {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ull;

inline uint64_t fnv1a(std::span<const uint8_t> bytes,
                      uint64_t h = kFnvOffset) {
  for (const uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a_str(const std::string& s, uint64_t h = kFnvOffset) {
  return fnv1a({reinterpret_cast<const uint8_t*>(s.data()), s.size()}, h);
}

inline uint64_t fnv1a_u64(uint64_t value, uint64_t h = kFnvOffset) {
  uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<uint8_t>(value >> (8 * i));
  return fnv1a(bytes, h);
}

inline uint64_t fnv1a_f64(double value, uint64_t h = kFnvOffset) {
  uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  return fnv1a_u64(bits, h);
}

inline std::string hash_hex(uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace qd
