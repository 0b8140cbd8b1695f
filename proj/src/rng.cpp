#include "fedreg/rng.hpp"

#include <cmath>

#include "fedreg/errors.hpp"

namespace fedreg {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::fork(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw ContractViolation("uniform_int: lo > hi");
  std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  std::uint64_t bound = range * (UINT64_MAX / range);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= bound);
  return lo + static_cast<std::int64_t>(r % range);
}

double Rng::gauss() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::gamma(double shape) {
  if (shape <= 0.0) throw ContractViolation("gamma: shape must be positive");
  if (shape < 1.0) {
    double u = uniform();
    if (u < 1e-300) u = 1e-300;
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = gauss();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> Rng::dirichlet(double alpha, std::size_t k) {
  std::vector<double> out(k);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = gamma(alpha);
    sum += out[i];
  }
  if (sum <= 0.0) {
    for (auto& v : out) v = 1.0 / static_cast<double>(k);
    return out;
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace fedreg
