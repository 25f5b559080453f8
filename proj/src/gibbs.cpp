#include "fpclust/gibbs.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>

#include "fpclust/error.hpp"

namespace fpclust {

McmcState init_state(const FpcaBasis& basis, const ScoreLikelihood& lik, const ModelConfig& model,
                     Rng& rng) {
  model.validate();
  const int k_count = model.k();
  if (basis.k() != k_count)
    throw DimensionError("model has " + std::to_string(k_count) + " dimensions but the basis has " +
                         std::to_string(basis.k()));
  const int j_count = model.clusters();
  const Eigen::Index n = basis.scores.rows();

  McmcState state;
  state.xi = basis.scores;
  state.c = IntMatrix::Zero(n, k_count);
  state.mu = Matrix::Zero(j_count, k_count);
  state.s = Matrix::Ones(j_count, k_count);
  state.p_raw = Matrix::Ones(j_count, k_count);
  state.p = Matrix::Zero(j_count, k_count);
  state.alpha = Vector::Zero(k_count);

  for (int k = 0; k < k_count; ++k) {
    const auto& prior = model.dims[static_cast<std::size_t>(k)];
    if (model.mode == Mode::pcl) {
      for (Eigen::Index i = 0; i < n; ++i) state.c(i, k) = rng.uniform_int(0, j_count - 1);
      for (int j = 0; j < j_count; ++j) state.mu(j, k) = rng.normal(prior.v, 1.0 / std::sqrt(prior.r));
    }
    for (int j = 0; j < j_count; ++j) {
      if (prior.fixed_scale) {
        state.s(j, k) = *prior.fixed_scale;
      } else if (prior.scale_prior == ScalePrior::gamma_precision) {
        state.s(j, k) = rng.gamma(prior.z, prior.beta);
      } else {
        const double sigma = prior.upper * rng.uniform_open_low();
        state.s(j, k) = 1.0 / (sigma * sigma);
      }
    }
    if (model.mode == Mode::pcl) {
      state.alpha(k) = prior.q * rng.uniform_open_low();
      for (int j = 0; j + 1 < j_count; ++j)
        state.p_raw(j, k) = std::min(rng.beta(1.0, state.alpha(k)), std::nextafter(1.0, 0.0));
    }
    state.p.col(k) = stick_weights(state.p_raw.col(k));
  }
  sample_tau(state, lik, model, rng);
  return state;
}

McmcState init_state(const FpcaBasis& basis, const ModelConfig& model, Rng& rng) {
  // Without data the empirical reconstruction stands in for the centred data.
  ScoreLikelihood lik(basis.scores * basis.eigenfunctions, basis.eigenfunctions,
                      kernels::Backend::serial);
  return init_state(basis, lik, model, rng);
}

void gibbs_sweep(McmcState& state, const ScoreLikelihood& lik, const ModelConfig& model, Rng& rng) {
  // Check the shared blocks straight away so a failure names its source
  // rather than the first cluster update that trips over it.
  sample_xi(state, lik, rng);
  if (!state.xi.allFinite()) throw NumericalError("block 'xi': non-finite score draw");
  sample_tau(state, lik, model, rng);
  if (!std::isfinite(state.tau) || state.tau <= 0.0)
    throw NumericalError("block 'tau': precision draw is not a positive finite number");
  for (int k = 0; k < state.k(); ++k) {
    sample_mu(state, k, model, rng);
    sample_scale(state, k, model, rng);
    if (model.mode == Mode::pcl) {
      sample_c(state, k, rng, lik.backend);
      sample_sticks(state, k, rng);
      sample_alpha(state, k, model, rng);
    }
  }
}

namespace {

std::vector<McmcState> run_chain(const ScoreLikelihood& lik, const FpcaBasis& basis,
                                 const ModelConfig& model, const McmcConfig& mcmc, int chain,
                                 const RunOptions& options) {
  Rng rng = Rng::stream(mcmc.seed, static_cast<std::uint64_t>(chain));
  McmcState state = init_state(basis, lik, model, rng);
  std::vector<McmcState> snapshots;
  snapshots.reserve(static_cast<std::size_t>(mcmc.snapshots()));
  const int total = mcmc.burn_in + mcmc.iterations;
  for (int sweep = 1; sweep <= total; ++sweep) {
    try {
      gibbs_sweep(state, lik, model, rng);
    } catch (const NumericalError& e) {
      throw NumericalError("chain " + std::to_string(chain) + ", sweep " + std::to_string(sweep) +
                           ": " + e.what());
    }
    if (auto bad = state.invalid_block(model); !bad.empty())
      throw NumericalError("chain " + std::to_string(chain) + ": invalid parameter block '" + bad +
                           "' after sweep " + std::to_string(sweep));
    if (options.on_sweep) options.on_sweep(chain, sweep, state);
    const int kept = sweep - mcmc.burn_in;
    if (kept > 0 && kept % mcmc.thinning == 0) snapshots.push_back(relabel(state, model.relabel));
  }
  return snapshots;
}

}  // namespace

PosteriorDraws run_sampler(const CenteredDataset& centered, const FpcaBasis& basis,
                           const ModelConfig& model, const McmcConfig& mcmc,
                           const RunOptions& options) {
  model.validate();
  mcmc.validate();
  if (centered.values.rows() != basis.scores.rows())
    throw DimensionError("centred data and basis scores differ in curve count");

  const auto start = std::chrono::steady_clock::now();
  ScoreLikelihood lik(centered.values, basis.eigenfunctions, options.backend);

  PosteriorDraws draws;
  draws.model = model;
  draws.mcmc = mcmc;
  draws.n = centered.values.rows();
  draws.time_points = centered.values.cols();
  draws.chains.resize(static_cast<std::size_t>(mcmc.chains));

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const int threads = options.threads > 0 ? options.threads : kernels::max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (mcmc.chains > 1 && threads > 1)
  for (int chain = 0; chain < mcmc.chains; ++chain) {
    try {
      draws.chains[static_cast<std::size_t>(chain)] = run_chain(lik, basis, model, mcmc, chain, options);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  draws.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return draws;
}

}  // namespace fpclust
