#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sgsim {

// splitmix64, used for seed derivation and stable hashing (DHT routing,
// result digests). Fully specified, so values never depend on the platform.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_str_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic random source. Wraps mt19937_64 but avoids the standard
// distributions, whose output is implementation-defined; every draw here is
// reproducible bit-for-bit for a given seed.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed)
      : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). Rejection sampling, so unbiased.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    for (;;) {
      std::uint64_t x = engine_();
      std::uint64_t r = x % n;
      if (x - r <= std::uint64_t(-1) - (n - 1)) return r;
    }
  }

  std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool chance(double p) { return uniform() < p; }

  // Independent child stream derived from the original seed and a tag;
  // does not consume draws from this stream.
  DetRng stream(std::uint64_t tag) const {
    return DetRng(hash_combine(seed_, tag));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sgsim
