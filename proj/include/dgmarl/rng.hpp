#pragma once

#include <cstdint>
#include <string_view>

namespace dgmarl {

// Counter-based PRNG. Every draw is a stateless mix of (key, counter), so
// streams can be split freely: substreams derive a fresh key from a purpose
// tag and never share output with the parent. Identical (seed, purpose,
// draw-index) gives identical bits on every platform.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed, uint64_t stream = 0)
      : key_(mix(seed ^ 0x9e3779b97f4a7c15ull, stream)), counter_(0) {}

  uint64_t next_u64() { return mix(key_, counter_++); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); rejection sampling keeps it exact.
  uint64_t next_below(uint64_t n) {
    if (n <= 1) return 0;
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
    uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return draw % n;
  }

  int next_int(int n) { return static_cast<int>(next_below(static_cast<uint64_t>(n))); }

  // Standard normal via Box-Muller on two uniform draws.
  double next_normal();

  // Independent substream; does not disturb this stream's counter.
  Rng split(uint64_t purpose) const {
    Rng child;
    child.key_ = mix(key_ ^ 0xda942042e4dd58b5ull, purpose);
    child.counter_ = 0;
    return child;
  }
  Rng split(std::string_view purpose) const { return split(fnv1a(purpose)); }

  uint64_t key() const { return key_; }

 private:
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  static uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

  uint64_t key_;
  uint64_t counter_;
};

}  // namespace dgmarl
