#pragma once

#include <cstdint>

namespace sbmkit::rng {

// Counter-based generator built on the splitmix64 finalizer. Every consumer
// owns a stream keyed by (seed, tag); values are a pure function of
// (seed, tag, counter), so independent streams never interleave and reruns
// with the same seed are bit-identical regardless of call order elsewhere.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Stream tags. Keep values stable: they are part of the reproducibility
// contract (a seed + tag pins the exact random stream).
enum Tag : std::uint64_t {
  kTagLabels = 1,      // community labels, counter = node index
  kTagTheta = 2,       // degree multipliers, counter = node index
  kTagPairs = 3,       // dense pair scan, counter = i*n + j (row-major, i < j)
  kTagPairsSparse = 4, // sparse sampler, sub-keyed per stratum pair
  kTagKmeans = 5,      // k-means seeding, sub-keyed per restart
  kTagEig = 6,         // eigensolver start block
  kTagGammaLabel = 7,  // gamma-overlap labelings
  kTagSweep = 8,       // per-cell seeds inside theorem sweeps
};

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag) {
  return mix(seed + kGolden * (tag + 1));
}

// sub-streams (restart index, stratum pair, ...) derive a fresh key
inline std::uint64_t sub_key(std::uint64_t key, std::uint64_t a, std::uint64_t b = 0) {
  return mix(key ^ mix(a + kGolden * (b + 1)));
}

inline std::uint64_t at(std::uint64_t key, std::uint64_t counter) {
  return mix(key + counter * kGolden);
}

inline double unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// Sequential view over a keyed counter stream.
struct Stream {
  std::uint64_t key;
  std::uint64_t counter = 0;

  Stream(std::uint64_t seed, std::uint64_t tag) : key(stream_key(seed, tag)) {}
  explicit Stream(std::uint64_t raw_key) : key(raw_key) {}

  std::uint64_t next_u64() { return at(key, counter++); }
  double next_double() { return unit(next_u64()); }
  // uniform integer in [0, bound) via rejection-free 128-bit multiply
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }
};

}  // namespace sbmkit::rng
