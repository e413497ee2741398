#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "osdec/errors.hpp"
#include "osdec/linalg.hpp"

namespace osdec {

// One step of the splitmix64 sequence; used to fold seed components into
// well-separated stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Collapses (master seed, coordinates, tags...) into one stream seed, so a
// trial's randomness depends only on what identifies it and never on
// scheduling order.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

// Seeded random source with bit-stable output. The mt19937_64 engine is
// pinned by the standard; the uniform and normal transforms are written out
// here because std::normal_distribution's algorithm is implementation
// defined and would break cross-toolchain reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, k) by rejection.
  std::uint64_t bounded(std::uint64_t k) {
    if (k == 0) throw InvalidInput("Rng::bounded: k must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % k;
  }

  // Standard normal via Box-Muller; generates pairs, returns one per call.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline Vector normal_vector(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix A(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) A(i, j) = rng.normal();
  return A;
}

}  // namespace osdec
