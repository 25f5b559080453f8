#pragma once

#include <cstdint>
#include <random>

namespace fpclust {

/// Seeded 64-bit Mersenne Twister with the draws the sampler needs. Rates
/// are used throughout (Gamma(shape, rate) has mean shape/rate).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  /// Independent stream `stream` of master seed `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream);

  void reseed(std::uint64_t seed);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_) / rate;
  }
  double beta(double a, double b);
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fpclust
