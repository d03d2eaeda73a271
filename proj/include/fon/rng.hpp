#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fon {

/// Seedable random source with pinned transforms.
///
/// Draws come from std::mt19937_64; uniforms take the top 53 bits of one
/// engine output, normals are basic Box-Muller on two fresh uniforms (no
/// caching of the second deviate). Keeping the transforms here, instead of
/// using the standard library's distribution objects, makes a trace a pure
/// function of the seed for any build of this code base.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Normal(mean, sd). Consumes exactly two engine outputs.
  double normal(double mean, double sd) {
    // Shift the first uniform into (0, 1] so log() stays finite.
    const double u1 =
        static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * (r * std::cos(2.0 * M_PI * u2));
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to mix seed material.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace fon
