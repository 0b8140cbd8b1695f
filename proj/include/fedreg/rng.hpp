#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fedreg {

// Deterministic random stream. mt19937_64 is fully specified by the standard;
// all distribution code is implemented here so that sequences are reproducible
// across platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from (seed, stream) via splitmix64 mixing.
  static Rng fork(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Inclusive range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller (cached spare).
  double gauss();

  // Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);

  // Symmetric Dirichlet(alpha) over k categories.
  std::vector<double> dirichlet(double alpha, std::size_t k);

  // In-place Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace fedreg
