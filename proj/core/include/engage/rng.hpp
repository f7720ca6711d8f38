#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace engage {

// SplitMix64. Portable and bit-reproducible across compilers and standard
// libraries, which std::uniform_*_distribution is not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Fans one user seed out into independent per-purpose streams:
// derive_seed(seed, purpose) = splitmix64(seed ^ fnv1a64(purpose)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

}  // namespace engage
