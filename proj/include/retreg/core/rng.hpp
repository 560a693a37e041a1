#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace retreg {

// SplitMix64 counter generator. Every randomized routine derives an
// independent stream from (seed, index), so parallel and serial schedules
// draw identical numbers and results stay byte-identical across --threads.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

// Derives a child seed from a parent seed and a stream index.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  SplitMix64 a(seed);
  SplitMix64 b(a.next() ^ (stream * 0xd1b54a32d192ed03ull + 0x2545f4914f6cdd1dull));
  return b.next();
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform in [0, 1).
inline double uniform_unit(SplitMix64& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe under log().
inline double uniform_positive(SplitMix64& rng) {
  return (static_cast<double>(rng.next() >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform_in(SplitMix64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Uniform integer in [0, n), n > 0. Widening-multiply trick.
inline int uniform_index(SplitMix64& rng, int n) {
  return static_cast<int>((static_cast<unsigned __int128>(rng.next()) *
                           static_cast<unsigned __int128>(n)) >>
                          64);
}

// Standard normal via Box-Muller.
inline double gaussian(SplitMix64& rng) {
  const double u1 = uniform_positive(rng);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
inline std::vector<int> sample_without_replacement(SplitMix64& rng, int n, int k) {
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    const int j = i + uniform_index(rng, n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

// Uniform rotation via Shoemake's subgroup algorithm.
inline Eigen::Matrix3d random_rotation(SplitMix64& rng) {
  const double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  const double u3 = uniform_unit(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const Eigen::Quaterniond q(a * std::sin(kTwoPi * u2), a * std::cos(kTwoPi * u2),
                             b * std::sin(kTwoPi * u3), b * std::cos(kTwoPi * u3));
  return q.toRotationMatrix();
}

}  // namespace retreg
