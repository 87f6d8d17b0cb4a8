#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace unityforest {

// All randomness in the library flows through streams derived from a user
// seed plus a fixed tag and up to three context words (tree index, candidate
// index, covariate, node id). Results are therefore independent of thread
// scheduling: every parallel unit owns its own stream.

namespace rng_tag {
constexpr uint64_t kInbagSample = 1;
constexpr uint64_t kRootSubset = 2;
constexpr uint64_t kCandidate = 3;
constexpr uint64_t kBodyExpand = 4;
constexpr uint64_t kVimPermutation = 5;
constexpr uint64_t kBaselinePermutation = 6;
constexpr uint64_t kCvFolds = 7;
constexpr uint64_t kDgp = 8;
constexpr uint64_t kReplicate = 9;
} // namespace rng_tag

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t a = 0, uint64_t b = 0,
                            uint64_t c = 0) {
  uint64_t h = splitmix64(seed ^ 0x1f83d9abfb41bd6bULL);
  h = splitmix64(h ^ tag);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

// Thin wrapper over mt19937_64 with distribution code of our own, so draws
// are identical across standard library implementations.
class Rng {
public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  uint64_t uniform_index(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform double in [0, 1).
  double uniform_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via polar Box-Muller (second variate cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform_double() - 1.0;
      v = 2.0 * uniform_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // First k elements of a random permutation of {0, .., n-1}, sorted.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline std::vector<size_t> Rng::sample_without_replacement(size_t n, size_t k) {
  std::vector<size_t> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = i;
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

} // namespace unityforest
