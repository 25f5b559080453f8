#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fpclust/fpca.hpp"
#include "fpclust/linalg.hpp"

namespace fpclust {

enum class ScalePrior {
  gamma_precision,  // s ~ Gamma(z, rate beta)
  uniform_sigma,    // 1/sqrt(s) ~ Uniform(0, upper]
};

/// Hyperparameters of one eigendimension's mixture.
struct DimensionPrior {
  double r = 1.0;  // precision of the N(v, 1/r) prior on cluster means
  ScalePrior scale_prior = ScalePrior::gamma_precision;
  double beta = 1.0;   // gamma rate
  double upper = 1.0;  // uniform sigma bound
  double q = 10.0;     // alpha ~ Uniform(0, q]
  double v = 0.0;
  double z = 1.0;
  /// Clamps every cluster precision of this dimension (conjugate checks).
  std::optional<double> fixed_scale;

  /// r = 1/lambda, beta = lambda, U = sqrt(lambda); the first dimension uses
  /// the gamma precision prior with q = 10, later ones the uniform sigma prior
  /// with q = 5.
  static DimensionPrior defaults(double eigenvalue, int dimension_index);
  void validate() const;
};

enum class Mode { pcl, standard_bfpca };
enum class Relabel { by_mean, by_weight };

struct ModelConfig {
  int truncation = 20;
  std::vector<DimensionPrior> dims;
  double a_prime = 1e-3;
  double b_prime = 1e-3;
  Mode mode = Mode::pcl;
  Relabel relabel = Relabel::by_mean;
  /// Clamps the noise precision (conjugate checks).
  std::optional<double> fixed_tau;

  int k() const noexcept { return static_cast<int>(dims.size()); }
  /// Standard Bayesian fPCA is the single zero-mean cluster special case.
  int clusters() const noexcept { return mode == Mode::standard_bfpca ? 1 : truncation; }

  static ModelConfig defaults(const FpcaBasis& basis, Mode mode = Mode::pcl, int truncation = 20);
  void validate() const;
};

struct McmcConfig {
  int burn_in = 5000;
  int iterations = 10000;
  int thinning = 5;
  int chains = 2;
  std::uint64_t seed = 1;

  int snapshots() const noexcept { return iterations / thinning; }
  static McmcConfig desk_scale(std::uint64_t seed = 1) { return {5000, 10000, 5, 2, seed}; }
  static McmcConfig paper_scale(std::uint64_t seed = 1) { return {100000, 100000, 5, 3, seed}; }
  void validate() const;
};

/// Full parameter state. Cluster labels are 0-based internally; files and
/// reports use 1-based labels.
struct McmcState {
  Matrix xi;     // n x K scores
  IntMatrix c;   // n x K labels in [0, J)
  Matrix mu;     // J x K cluster means
  Matrix s;      // J x K cluster precisions
  Matrix p_raw;  // J x K stick variables, last row 1
  Matrix p;      // J x K weights, columns on the simplex
  Vector alpha;  // K
  double tau = 1.0;

  Eigen::Index curves() const noexcept { return xi.rows(); }
  int k() const noexcept { return static_cast<int>(xi.cols()); }
  int clusters() const noexcept { return static_cast<int>(mu.rows()); }

  /// Name of the first parameter block that is non-finite or out of range,
  /// empty when the state is valid.
  std::string invalid_block(const ModelConfig& model) const;
};

struct PosteriorDraws {
  ModelConfig model;
  McmcConfig mcmc;
  Eigen::Index n = 0;
  Eigen::Index time_points = 0;
  std::vector<std::vector<McmcState>> chains;
  double wall_seconds = 0.0;

  std::size_t total_snapshots() const;
  /// Pooled view over all chains, in chain order.
  std::vector<const McmcState*> pooled() const;
};

nlohmann::json to_json(const DimensionPrior& prior);
DimensionPrior dimension_prior_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& model);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const McmcConfig& mcmc);
McmcConfig mcmc_config_from_json(const nlohmann::json& j);

std::string to_string(Mode mode);
std::string to_string(Relabel rule);
std::string to_string(ScalePrior prior);

}  // namespace fpclust
