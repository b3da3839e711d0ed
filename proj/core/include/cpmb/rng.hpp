#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cpmb {

/// Seedable generator used throughout the simulator.
///
/// Stream splitting rule: substream(i) derives a child generator from
/// (base_seed, i) via splitmix64, so worker i always sees the same stream
/// regardless of how trials are scheduled. Gaussian variates come from an
/// explicit Box-Muller transform on raw engine output, which keeps results
/// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_seed_(seed), engine_(mix(seed)) {}

  Rng substream(std::uint64_t index) const {
    return Rng(mix(base_seed_ + 0x9e3779b97f4a7c15ULL * (index + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal variate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_gaussian(double variance) {
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return {s * re, s * im};
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t base_seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpmb
