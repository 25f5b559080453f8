#include "fpclust/reconstruction.hpp"

#include "fpclust/error.hpp"

namespace fpclust {

Reconstruction reconstruct(const PosteriorDraws& draws, const FpcaBasis& basis, double level,
                           kernels::Backend backend) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("credible level must lie in (0, 1)");
  if (draws.model.k() != basis.k())
    throw DimensionError("draws have " + std::to_string(draws.model.k()) + " dimensions, basis has " +
                         std::to_string(basis.k()));
  if (draws.time_points != basis.eigenfunctions.cols())
    throw DimensionError("draws and basis disagree on the number of time points");
  const auto pooled = draws.pooled();
  if (pooled.empty()) throw DimensionError("no posterior snapshots");

  std::vector<const Matrix*> xi;
  xi.reserve(pooled.size());
  for (const McmcState* s : pooled) xi.push_back(&s->xi);
  const double tail = (1.0 - level) / 2.0;
  auto bands = kernels::pointwise_bands(backend, xi, basis.eigenfunctions, basis.mean_curve, tail, 1.0 - tail);
  return {std::move(bands.mean), std::move(bands.lower), std::move(bands.upper), level};
}

Matrix reconstruct_empirical(const FpcaBasis& basis) { return reconstruct_from_scores(basis, basis.scores); }

}  // namespace fpclust
