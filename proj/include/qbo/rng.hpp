#ifndef QBO_RNG_HPP
#define QBO_RNG_HPP

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace qbo {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for sub-stream `index` of `seed` (paths, replicas, phases of a run).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

// Ziggurat normals from boost are several times faster than the polar method
// in std::normal_distribution, which matters for 10^9-step ensembles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  /// Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

}  // namespace qbo

#endif  // QBO_RNG_HPP
