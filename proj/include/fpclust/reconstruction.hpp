#pragma once

#include "fpclust/fpca.hpp"
#include "fpclust/kernels.hpp"
#include "fpclust/model.hpp"

namespace fpclust {

/// Posterior mean curves and pointwise equal-tailed credible bands, on the
/// original (uncentred) scale. All n x T.
struct Reconstruction {
  Matrix mean;
  Matrix lower;
  Matrix upper;
  double level = 0.95;
};

/// Pools the snapshots of all chains. `level` must lie in (0, 1).
Reconstruction reconstruct(const PosteriorDraws& draws, const FpcaBasis& basis, double level = 0.95,
                           kernels::Backend backend = kernels::default_backend());

/// Plug-in reconstruction from the empirical scores (no bands).
Matrix reconstruct_empirical(const FpcaBasis& basis);

}  // namespace fpclust
