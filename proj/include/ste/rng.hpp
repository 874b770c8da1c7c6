#ifndef STE_RNG_HPP
#define STE_RNG_HPP

#include <cstdint>
#include <random>

namespace ste {

// 64-bit mix used to derive independent per-episode seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. The engine output is fully specified by the
// standard; the uniform conversions below are our own so that sequences are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n). n must be positive.
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - un) % un;  // 2^64 mod n
    std::uint64_t v = next_u64();
    while (v < threshold) v = next_u64();
    return static_cast<int>(v % un);
  }

 private:
  std::mt19937_64 gen_;
};

// Per-episode stream: master seed XOR episode index through the mixer.
inline Rng episode_rng(std::uint64_t master_seed, std::uint64_t episode_index) {
  return Rng(splitmix64(master_seed ^ episode_index));
}

}  // namespace ste

#endif
