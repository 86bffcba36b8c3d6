#pragma once

// Counter-based random streams (philox4x32-10).
//
// A stream is keyed by (seed, stream_id) and produces values as a pure
// function of (seed, stream_id, block_counter). Streams never share state,
// so episode i draws the same numbers whether it runs alone, in a batch,
// or on a different thread.

#include <cmath>
#include <cstdint>
#include <limits>

namespace qd {

namespace detail {

// Multipliers and key schedule constants from the original Philox paper.
inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

struct PhiloxBlock {
  uint32_t v[4];
};

inline PhiloxBlock philox4x32(uint32_t c0, uint32_t c1, uint32_t c2,
                              uint32_t c3, uint32_t k0, uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c0;
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c2;
    const uint32_t n0 = static_cast<uint32_t>(p1 >> 32) ^ c1 ^ k0;
    const uint32_t n1 = static_cast<uint32_t>(p1);
    const uint32_t n2 = static_cast<uint32_t>(p0 >> 32) ^ c3 ^ k1;
    const uint32_t n3 = static_cast<uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

inline uint32_t lo32(uint64_t x) { return static_cast<uint32_t>(x); }
inline uint32_t hi32(uint64_t x) { return static_cast<uint32_t>(x >> 32); }

}  // namespace detail

// Hash (seed, a, b) into a fresh 64-bit seed. Used to give each episode,
// generation or worker its own independent stream without coordination.
inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
  const detail::PhiloxBlock blk =
      detail::philox4x32(detail::lo32(a), detail::hi32(a), detail::lo32(b),
                         detail::hi32(b), detail::lo32(seed),
                         detail::hi32(seed));
  return static_cast<uint64_t>(blk.v[0]) |
         (static_cast<uint64_t>(blk.v[1]) << 32);
}

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(uint64_t seed, uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {}

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_; }

  uint32_t next_u32() {
    if (pos_ == 4) refill();
    return block_.v[pos_++];
  }

  uint64_t next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + next_double() * (hi - lo);
  }

  // Unbiased integer in [0, bound) by rejection.
  uint64_t below(uint64_t bound) {
    if (bound <= 1) return 0;
    // 2^64 mod bound; values >= threshold map uniformly under % bound.
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller. The second variate of each pair is
  // cached so consecutive calls consume draws in a fixed pattern.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps log() finite.
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.28318530717958647692 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

 private:
  void refill() {
    block_ = detail::philox4x32(detail::lo32(counter_), detail::hi32(counter_),
                                detail::lo32(stream_), detail::hi32(stream_),
                                detail::lo32(seed_), detail::hi32(seed_));
    ++counter_;
    pos_ = 0;
  }

  uint64_t seed_ = 0;
  uint64_t stream_ = 0;
  uint64_t counter_ = 0;
  detail::PhiloxBlock block_{{0, 0, 0, 0}};
  int pos_ = 4;  // forces a refill on first use
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qd
