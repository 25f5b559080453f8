#pragma once

#include <functional>

#include "fpclust/conditionals.hpp"
#include "fpclust/dataset.hpp"
#include "fpclust/fpca.hpp"
#include "fpclust/model.hpp"

namespace fpclust {

/// Starting state: scores at their empirical values, labels uniform on the
/// clusters, mu/s/sticks/alpha from their priors, tau from its conditional
/// given the empirical scores.
McmcState init_state(const FpcaBasis& basis, const ScoreLikelihood& lik, const ModelConfig& model,
                     Rng& rng);
McmcState init_state(const FpcaBasis& basis, const ModelConfig& model, Rng& rng);

/// One full sweep: xi, tau, then per dimension mu, s, c, sticks, alpha.
void gibbs_sweep(McmcState& state, const ScoreLikelihood& lik, const ModelConfig& model, Rng& rng);

struct RunOptions {
  kernels::Backend backend = kernels::default_backend();
  /// Chains run concurrently on up to this many threads (0 = OpenMP default).
  int threads = 0;
  /// Optional per-sweep observer, called from the chain's thread.
  std::function<void(int chain, int sweep, const McmcState&)> on_sweep;
};

/// Runs every chain for burn_in + iterations sweeps, storing a relabelled
/// snapshot every `thinning` sweeps after burn-in. Chain c uses the RNG
/// stream (seed, c). Throws NumericalError naming the sweep and parameter
/// block when a non-finite or out-of-range state appears.
PosteriorDraws run_sampler(const CenteredDataset& centered, const FpcaBasis& basis,
                           const ModelConfig& model, const McmcConfig& mcmc,
                           const RunOptions& options = {});

}  // namespace fpclust
