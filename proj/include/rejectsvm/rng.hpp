#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rsvm {

// Portable random source: std::mt19937_64, whose output sequence is fixed by
// the C++ standard, with uniforms built from the top 53 bits and normals from
// the Box-Muller transform. Library distributions (std::normal_distribution
// and friends) are avoided because their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Standard normal.
  double normal();
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mix of (seed, stream) for independent per-task seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rsvm
