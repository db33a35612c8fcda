#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace chpt {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Seedable stream with explicitly coded draw algorithms. The mt19937_64
// engine is bit-specified by the standard; std::* distributions are not,
// so every variate below is generated by a frozen algorithm to keep
// fixtures reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1); safe to pass through log/tan
  double uniform_pos() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; two uniforms per variate, no cached state
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // standard Cauchy scaled; inverse-CDF form
  double cauchy(double scale) {
    return scale * std::tan(kPi * (uniform_pos() - 0.5));
  }

  // Marsaglia-Tsang squeeze method; shape < 1 via the boost trick
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      double v = t * t * t;
      double u = uniform_pos();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace chpt
