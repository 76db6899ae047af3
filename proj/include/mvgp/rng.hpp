#ifndef MVGP_RNG_HPP
#define MVGP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace mvgp {

/// Deterministic random source. All samplers are implemented explicitly so
/// the stream is reproducible bit-for-bit for a given seed, independent of
/// the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  /// Marsaglia-Tsang gamma sampler, shape k > 0, unit scale.
  double gamma(double k) {
    if (k < 1.0) {
      const double u = std::max(uniform(), 1e-300);
      return gamma(k + 1.0) * std::pow(u, 1.0 / k);
    }
    const double d = k - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      double prod = uniform();
      long n = 0;
      while (prod > limit) {
        prod *= uniform();
        ++n;
      }
      return n;
    }
    // split recursively; keeps the simple multiplicative scheme exact
    const double half = std::floor(lambda / 2.0);
    return poisson(half) + poisson(lambda - half);
  }

  long binomial(long trials, double p) {
    long k = 0;
    for (long i = 0; i < trials; ++i)
      if (uniform() < p) ++k;
    return k;
  }

  /// Negative binomial with mean m and shape r (gamma-Poisson mixture).
  long negbin(double m, double r) {
    const double g = gamma(r) * (m / r);
    return poisson(g);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mvgp

#endif
