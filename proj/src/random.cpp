#include "fpclust/random.hpp"

namespace fpclust {

void Rng::reseed(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream) {
  Rng rng;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  rng.engine_.seed(seq);
  return rng;
}

double Rng::beta(double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(engine_);
  const double y = std::gamma_distribution<double>(b, 1.0)(engine_);
  const double sum = x + y;
  if (sum == 0.0) return a >= b ? 1.0 : 0.0;
  return x / sum;
}

}  // namespace fpclust
