#include "fpclust/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fpclust/conditionals.hpp"
#include "fpclust/error.hpp"

namespace fpclust {

namespace {

void require_labels(const std::vector<IntVector>& labels) {
  if (labels.empty()) throw DimensionError("no posterior label draws");
  for (const auto& l : labels)
    if (l.size() != labels.front().size()) throw DimensionError("label draws differ in length");
}

Distribution from_counts(const std::map<int, std::size_t>& counts, std::size_t total) {
  Distribution d;
  for (const auto& [value, count] : counts) {
    d.support.push_back(value);
    d.mass.push_back(static_cast<double>(count) / static_cast<double>(total));
  }
  return d;
}

}  // namespace

std::vector<IntVector> dimension_labels(const PosteriorDraws& draws, int dimension) {
  if (dimension < 0 || dimension >= draws.model.k())
    throw DimensionError("dimension " + std::to_string(dimension + 1) + " out of range");
  std::vector<IntVector> out;
  out.reserve(draws.total_snapshots());
  for (const McmcState* s : draws.pooled()) out.push_back(s->c.col(dimension));
  return out;
}

int occupied_clusters(const Eigen::Ref<const IntVector>& labels) {
  std::vector<int> v(labels.data(), labels.data() + labels.size());
  std::sort(v.begin(), v.end());
  return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

double Distribution::probability(int value) const {
  for (std::size_t i = 0; i < support.size(); ++i)
    if (support[i] == value) return mass[i];
  return 0.0;
}

int Distribution::mode() const {
  if (support.empty()) throw DimensionError("empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < mass.size(); ++i)
    if (mass[i] > mass[best]) best = i;
  return support[best];
}

Distribution jplus_distribution(const std::vector<IntVector>& labels) {
  require_labels(labels);
  std::map<int, std::size_t> counts;
  for (const auto& l : labels) ++counts[occupied_clusters(l)];
  return from_counts(counts, labels.size());
}

PriorSingleCluster prior_single_cluster(Eigen::Index n, int truncation, const AlphaPrior& alpha,
                                        int simulations, Rng& rng) {
  if (n < 1 || truncation < 1 || simulations < 1)
    throw ValidationError("prior simulation needs n, J and the simulation count to be positive");
  if (!alpha.fixed && !(alpha.upper > 0.0)) throw ValidationError("alpha upper bound must be positive");
  if (alpha.fixed && !(*alpha.fixed > 0.0)) throw ValidationError("fixed alpha must be positive");

  Vector sticks(truncation);
  std::vector<double> cumulative(truncation);
  std::vector<char> used(truncation);
  int single = 0;
  for (int sim = 0; sim < simulations; ++sim) {
    const double a = alpha.fixed ? *alpha.fixed : alpha.upper * rng.uniform_open_low();
    for (int j = 0; j + 1 < truncation; ++j) sticks(j) = rng.beta(1.0, a);
    sticks(truncation - 1) = 1.0;
    const Vector w = stick_weights(sticks);
    double acc = 0.0;
    for (int j = 0; j < truncation; ++j) cumulative[j] = (acc += w(j));
    std::fill(used.begin(), used.end(), 0);
    int distinct = 0;
    for (Eigen::Index i = 0; i < n && distinct < 2; ++i) {
      const double u = rng.uniform() * acc;
      int j = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      j = std::min(j, truncation - 1);
      if (!used[j]) {
        used[j] = 1;
        ++distinct;
      }
    }
    if (distinct == 1) ++single;
  }
  PriorSingleCluster out;
  out.simulations = simulations;
  out.probability = static_cast<double>(single) / simulations;
  out.standard_error = std::sqrt(out.probability * (1.0 - out.probability) / simulations);
  return out;
}

BayesFactor bayes_factor_single(double posterior_single, const PriorSingleCluster& prior) {
  BayesFactor bf;
  bf.posterior_single = posterior_single;
  bf.prior_single = prior.probability;
  bf.prior_standard_error = prior.standard_error;
  bf.prior_simulations = prior.simulations;
  if (prior.probability <= 0.0 || prior.probability >= 1.0) {
    bf.status = BayesFactorStatus::undefined;
    bf.value = std::numeric_limits<double>::quiet_NaN();
    return bf;
  }
  const double prior_odds = prior.probability / (1.0 - prior.probability);
  if (posterior_single >= 1.0) {
    bf.status = BayesFactorStatus::infinite;
    bf.value = std::numeric_limits<double>::infinity();
    return bf;
  }
  bf.value = posterior_single / (1.0 - posterior_single) / prior_odds;
  return bf;
}

BayesFactor bayes_factor_single(const std::vector<IntVector>& labels, int truncation,
                                const AlphaPrior& alpha, int simulations, Rng& rng) {
  const Distribution jplus = jplus_distribution(labels);
  const auto prior = prior_single_cluster(labels.front().size(), truncation, alpha, simulations, rng);
  return bayes_factor_single(jplus.probability(1), prior);
}

std::vector<ClusterSize> size_posteriors(const std::vector<IntVector>& labels, int truncation) {
  require_labels(labels);
  const double n = static_cast<double>(labels.front().size());
  std::vector<std::map<int, std::size_t>> counts(truncation);
  std::vector<std::size_t> empty(truncation, 0);
  for (const auto& l : labels) {
    const auto sizes = cluster_counts(l, truncation);
    for (int j = 0; j < truncation; ++j) {
      if (sizes[j] == 0)
        ++empty[j];
      else
        ++counts[j][sizes[j]];
    }
  }
  std::vector<ClusterSize> out(truncation);
  for (int j = 0; j < truncation; ++j) {
    out[j].cluster = j;
    out[j].empty_probability = static_cast<double>(empty[j]) / static_cast<double>(labels.size());
    const std::size_t nonempty = labels.size() - empty[j];
    for (const auto& [size, count] : counts[j]) {
      out[j].fractions.push_back(size / n);
      out[j].mass.push_back(static_cast<double>(count) / static_cast<double>(nonempty));
    }
  }
  return out;
}

IntVector map_partition(const std::vector<IntVector>& labels) {
  require_labels(labels);
  const Eigen::Index n = labels.front().size();
  int max_label = 0;
  for (const auto& l : labels) max_label = std::max(max_label, l.maxCoeff());
  IntVector out(n);
  std::vector<int> freq(max_label + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(freq.begin(), freq.end(), 0);
    for (const auto& l : labels) ++freq[l(i)];
    out(i) = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
  }
  return out;
}

Matrix pairwise_probability_matrix(const std::vector<IntVector>& labels, kernels::Backend backend) {
  require_labels(labels);
  return kernels::coclustering(backend, labels);
}

ClusteringPosterior summarize_clustering(const PosteriorDraws& draws, int prior_simulations,
                                         std::uint64_t seed, kernels::Backend backend) {
  ClusteringPosterior out;
  const int J = draws.model.clusters();
  for (int k = 0; k < draws.model.k(); ++k) {
    const auto labels = dimension_labels(draws, k);
    DimensionClustering d;
    d.dimension = k;
    d.jplus = jplus_distribution(labels);
    if (draws.model.mode == Mode::pcl) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k));
      const auto prior = prior_single_cluster(draws.n, J, AlphaPrior{draws.model.dims[k].q, std::nullopt},
                                              prior_simulations, rng);
      d.bayes_factor = bayes_factor_single(d.jplus.probability(1), prior);
    } else {
      d.bayes_factor.status = BayesFactorStatus::undefined;
      d.bayes_factor.value = std::numeric_limits<double>::quiet_NaN();
      d.bayes_factor.posterior_single = 1.0;
      d.bayes_factor.prior_single = 1.0;
    }
    d.sizes = size_posteriors(labels, J);
    d.map = map_partition(labels);
    d.ppm = pairwise_probability_matrix(labels, backend);
    out.dims.push_back(std::move(d));
  }
  return out;
}

std::string to_string(BayesFactorStatus status) {
  switch (status) {
    case BayesFactorStatus::finite: return "finite";
    case BayesFactorStatus::infinite: return "infinite";
    case BayesFactorStatus::undefined: return "undefined";
  }
  return "unknown";
}

nlohmann::json to_json(const BayesFactor& bf) {
  nlohmann::json j;
  j["status"] = to_string(bf.status);
  if (bf.status == BayesFactorStatus::finite)
    j["value"] = bf.value;
  else if (bf.status == BayesFactorStatus::infinite)
    j["value"] = "inf";
  else
    j["value"] = nullptr;
  j["posterior_p_single"] = bf.posterior_single;
  j["prior_p_single"] = bf.prior_single;
  j["prior_p_single_se"] = bf.prior_standard_error;
  j["prior_simulations"] = bf.prior_simulations;
  return j;
}

nlohmann::json to_json(const ClusteringPosterior& posterior) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : posterior.dims) {
    nlohmann::json jd;
    jd["dimension"] = d.dimension + 1;
    nlohmann::json jplus = nlohmann::json::array();
    for (std::size_t i = 0; i < d.jplus.support.size(); ++i)
      jplus.push_back({{"clusters", d.jplus.support[i]}, {"probability", d.jplus.mass[i]}});
    jd["occupied_clusters"] = jplus;
    jd["occupied_clusters_mode"] = d.jplus.mode();
    jd["bayes_factor_single"] = to_json(d.bayes_factor);
    nlohmann::json sizes = nlohmann::json::array();
    for (const auto& s : d.sizes) {
      if (s.empty_probability >= 1.0) continue;
      nlohmann::json js;
      js["cluster"] = s.cluster + 1;
      js["empty_probability"] = s.empty_probability;
      js["size_fraction"] = s.fractions;
      js["probability"] = s.mass;
      sizes.push_back(js);
    }
    jd["cluster_sizes"] = sizes;
    std::vector<int> map(d.map.data(), d.map.data() + d.map.size());
    for (int& m : map) ++m;
    jd["map_partition"] = map;
    dims.push_back(jd);
  }
  return {{"dimensions", dims}};
}

}  // namespace fpclust
