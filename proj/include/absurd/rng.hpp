#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

// Deterministic randomness for the whole toolchain.
//
// Everything is built on splitmix64 so that generated batches are
// byte-identical across platforms and standard-library versions (the
// std::uniform_* distributions are implementation-defined and must not be
// used anywhere on a generation path).
//
// Seed-splitting rule (the documented contract for reproducibility):
//   instance_seed(master, i) = mix64(master + (i + 1) * GOLDEN)
//   derive_seed(seed, tag)   = mix64(seed + (tag + 1) * STREAM)
// mix64 is the splitmix64 finalizer, a bijection on uint64, and GOLDEN/STREAM
// are odd, so per-instance seeds are collision-free within a batch and the
// per-purpose streams (binding draws, event draws, ...) never alias.

namespace absurd {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kStream = 0xD1B54A32D192ED03ULL;

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t instance_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed + (index + 1) * kGolden);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed + (tag + 1) * kStream);
}

// FNV-1a, for stable (cross-platform) hashing of identifier strings.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// splitmix64 stream generator with unbiased bounded draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Unbiased draw in [0, n) via modulo rejection.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r = next();
    while (r < threshold) r = next();
    return r % n;
  }

  bool next_bool() { return (next() >> 63) != 0; }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct values from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t state_;
};

inline std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (n < 0) n = 0;
  if (k < 0) k = 0;
  if (k > n) k = n;
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.push_back(i);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::size_t j = static_cast<std::size_t>(next_below(pool.size()));
    out.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return out;
}

}  // namespace absurd
