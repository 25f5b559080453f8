#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "fpclust/kernels.hpp"
#include "fpclust/model.hpp"
#include "fpclust/random.hpp"

namespace fpclust {

/// Posterior labels of one eigendimension, pooled over chains.
std::vector<IntVector> dimension_labels(const PosteriorDraws& draws, int dimension);

/// Number of distinct labels in use.
int occupied_clusters(const Eigen::Ref<const IntVector>& labels);

/// Discrete distribution on integer support.
struct Distribution {
  std::vector<int> support;
  std::vector<double> mass;

  double probability(int value) const;
  int mode() const;
};

Distribution jplus_distribution(const std::vector<IntVector>& labels);

/// Prior on alpha used when simulating the prior number of occupied clusters.
struct AlphaPrior {
  double upper = 10.0;          // alpha ~ Uniform(0, upper]
  std::optional<double> fixed;  // point mass instead
};

struct PriorSingleCluster {
  double probability = 0.0;
  double standard_error = 0.0;
  int simulations = 0;
};

/// Monte Carlo estimate of P(J+ = 1) under the truncated stick-breaking
/// prior for n items and J clusters.
PriorSingleCluster prior_single_cluster(Eigen::Index n, int truncation, const AlphaPrior& alpha,
                                        int simulations, Rng& rng);

enum class BayesFactorStatus { finite, infinite, undefined };

struct BayesFactor {
  double value = 0.0;
  BayesFactorStatus status = BayesFactorStatus::finite;
  double posterior_single = 0.0;
  double prior_single = 0.0;
  double prior_standard_error = 0.0;
  int prior_simulations = 0;
};

/// Posterior odds of J+ = 1 over prior odds. Infinite when every posterior
/// draw has one cluster, undefined when the prior probability is 0 or 1.
BayesFactor bayes_factor_single(double posterior_single, const PriorSingleCluster& prior);
BayesFactor bayes_factor_single(const std::vector<IntVector>& labels, int truncation,
                                const AlphaPrior& alpha, int simulations, Rng& rng);

struct ClusterSize {
  int cluster = 0;  // 0-based relabelled index
  double empty_probability = 0.0;
  /// Size as a fraction of n, over draws in which the cluster is non-empty.
  std::vector<double> fractions;
  std::vector<double> mass;
};

std::vector<ClusterSize> size_posteriors(const std::vector<IntVector>& labels, int truncation);

/// Per-item most frequent label; ties go to the smallest label.
IntVector map_partition(const std::vector<IntVector>& labels);

/// Posterior probability that items i and i' share a cluster.
Matrix pairwise_probability_matrix(const std::vector<IntVector>& labels,
                                   kernels::Backend backend = kernels::default_backend());

struct DimensionClustering {
  int dimension = 0;
  Distribution jplus;
  BayesFactor bayes_factor;
  std::vector<ClusterSize> sizes;
  IntVector map;
  Matrix ppm;
};

struct ClusteringPosterior {
  std::vector<DimensionClustering> dims;
};

/// Summaries for every eigendimension. The prior P(J+ = 1) uses
/// alpha ~ Uniform(0, q] of each dimension.
ClusteringPosterior summarize_clustering(const PosteriorDraws& draws, int prior_simulations,
                                         std::uint64_t seed,
                                         kernels::Backend backend = kernels::default_backend());

std::string to_string(BayesFactorStatus status);
nlohmann::json to_json(const BayesFactor& bf);
/// Everything except the n x n matrices, which are written separately.
nlohmann::json to_json(const ClusteringPosterior& posterior);

}  // namespace fpclust
