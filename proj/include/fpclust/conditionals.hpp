#pragma once

#include <vector>

#include "fpclust/kernels.hpp"
#include "fpclust/linalg.hpp"
#include "fpclust/model.hpp"
#include "fpclust/random.hpp"

namespace fpclust {

struct NormalParams {
  double mean;
  double variance;
};

struct GammaParams {
  double shape;
  double rate;
};

/// Quantities of the centred data that stay fixed across sweeps.
struct ScoreLikelihood {
  ScoreLikelihood(const Matrix& centred, const Matrix& eigenfunctions,
                  kernels::Backend backend = kernels::default_backend());

  Matrix y;
  Matrix phi;
  Matrix data_projection;  // y phi'
  Matrix gram;             // phi phi'
  kernels::Backend backend;

  Eigen::Index curves() const noexcept { return y.rows(); }
  Eigen::Index time_points() const noexcept { return y.cols(); }

  /// sum_t (y_it - sum_{k' != k} xi_ik' phi_k't) phi_kt.
  double residual_projection(const Matrix& xi, Eigen::Index i, Eigen::Index k) const;
  double residual_sum_of_squares(const Matrix& xi) const;
  /// Gaussian log-likelihood of the centred data given scores and tau.
  double log_likelihood(const Matrix& xi, double tau) const;
};

// Closed-form conditionals.

/// Score given its residual projection, cluster (mu, s) and noise precision.
/// `norm2` is sum_t phi_kt^2, one for unit-normalised eigenfunctions.
NormalParams xi_conditional(double tau, double s, double mu, double projection, double norm2 = 1.0);
GammaParams tau_conditional(double ssr, Eigen::Index curves, Eigen::Index time_points,
                            double a_prime, double b_prime);
NormalParams mu_conditional(int count, double sum, double s, double r, double v);
GammaParams scale_conditional(int count, double sum_squares, double z, double beta);

/// Weights p_j = p'_j prod_{l<j} (1 - p'_l); the last stick is taken as 1.
Vector stick_weights(const Eigen::Ref<const Vector>& p_raw);
/// Stick variables reproducing the given weights (inverse of stick_weights).
Vector sticks_from_weights(const Eigen::Ref<const Vector>& weights);

/// Draws from Gamma(shape, rate) truncated to (0, upper] by inverting the CDF.
double truncated_gamma(double shape, double rate, double upper, Rng& rng);

/// One slice-sampling update of sigma with density proportional to
/// sigma^-count exp(-sum_squares / (2 sigma^2)) on (0, upper].
double slice_sample_sigma(double current, int count, double sum_squares, double upper, Rng& rng);

/// Index drawn with probability proportional to exp(log_weights).
int categorical_from_log(const Eigen::Ref<const Vector>& log_weights, Rng& rng);

std::vector<int> cluster_counts(const Eigen::Ref<const IntVector>& labels, int clusters);

// Gibbs updates. Dimension-level updates act on column k of the state.

void sample_xi(McmcState& state, const ScoreLikelihood& lik, Rng& rng);
void sample_tau(McmcState& state, const ScoreLikelihood& lik, const ModelConfig& model, Rng& rng);
void sample_mu(McmcState& state, int k, const ModelConfig& model, Rng& rng);
void sample_scale(McmcState& state, int k, const ModelConfig& model, Rng& rng);
void sample_c(McmcState& state, int k, Rng& rng,
              kernels::Backend backend = kernels::default_backend());
void sample_sticks(McmcState& state, int k, Rng& rng);
void sample_alpha(McmcState& state, int k, const ModelConfig& model, Rng& rng);

/// Per dimension, permutes cluster labels so that non-empty clusters come
/// first in ascending order of mean (or weight), followed by empty ones in
/// the same order. Sticks are recomputed from the permuted weights.
McmcState relabel(const McmcState& state, Relabel rule);

}  // namespace fpclust
