#include "fpclust/model.hpp"

#include <cmath>

#include "fpclust/error.hpp"

namespace fpclust {

namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::pcl ? "pcl" : "standard_bfpca"; }
std::string to_string(Relabel rule) { return rule == Relabel::by_mean ? "by_mean" : "by_weight"; }
std::string to_string(ScalePrior prior) {
  return prior == ScalePrior::gamma_precision ? "gamma_precision" : "uniform_sigma";
}

DimensionPrior DimensionPrior::defaults(double eigenvalue, int dimension_index) {
  if (!positive_finite(eigenvalue)) throw ValidationError("eigenvalue must be positive");
  DimensionPrior prior;
  prior.r = 1.0 / eigenvalue;
  prior.beta = eigenvalue;
  prior.upper = std::sqrt(eigenvalue);
  if (dimension_index == 0) {
    prior.scale_prior = ScalePrior::gamma_precision;
    prior.q = 10.0;
  } else {
    prior.scale_prior = ScalePrior::uniform_sigma;
    prior.q = 5.0;
  }
  return prior;
}

void DimensionPrior::validate() const {
  if (!positive_finite(r)) throw ValidationError("dimension prior: r must be positive");
  if (!positive_finite(q)) throw ValidationError("dimension prior: Q must be positive");
  if (!positive_finite(z)) throw ValidationError("dimension prior: z must be positive");
  if (!std::isfinite(v)) throw ValidationError("dimension prior: v must be finite");
  if (scale_prior == ScalePrior::gamma_precision && !positive_finite(beta))
    throw ValidationError("dimension prior: beta must be positive");
  if (scale_prior == ScalePrior::uniform_sigma && !positive_finite(upper))
    throw ValidationError("dimension prior: U must be positive");
  if (fixed_scale && !positive_finite(*fixed_scale))
    throw ValidationError("dimension prior: fixed scale must be positive");
}

ModelConfig ModelConfig::defaults(const FpcaBasis& basis, Mode mode, int truncation) {
  ModelConfig model;
  model.mode = mode;
  model.truncation = truncation;
  for (int k = 0; k < basis.k(); ++k)
    model.dims.push_back(DimensionPrior::defaults(basis.eigenvalues(k), k));
  return model;
}

void ModelConfig::validate() const {
  if (dims.empty()) throw ValidationError("model needs at least one eigendimension");
  if (mode == Mode::pcl && truncation < 2)
    throw ValidationError("truncation J must be at least 2 for the clustering model");
  if (!positive_finite(a_prime) || !positive_finite(b_prime))
    throw ValidationError("noise precision hyperparameters must be positive");
  if (fixed_tau && !positive_finite(*fixed_tau)) throw ValidationError("fixed tau must be positive");
  for (const auto& d : dims) d.validate();
}

void McmcConfig::validate() const {
  if (burn_in < 0) throw ValidationError("burn-in must be non-negative");
  if (iterations <= 0 || thinning <= 0 || chains <= 0)
    throw ValidationError("iterations, thinning and chains must be positive");
  if (iterations % thinning != 0)
    throw ValidationError("iterations must be divisible by thinning");
}

std::string McmcState::invalid_block(const ModelConfig& model) const {
  const int j = model.clusters();
  if (!xi.allFinite()) return "xi";
  if (!std::isfinite(tau) || !(tau > 0.0)) return "tau";
  if (!mu.allFinite()) return "mu";
  if (!s.allFinite() || (s.array() <= 0.0).any()) return "s";
  if (c.size() > 0 && (c.minCoeff() < 0 || c.maxCoeff() >= j)) return "c";
  if (!p.allFinite() || (p.array() < 0.0).any()) return "p";
  for (Eigen::Index k = 0; k < p.cols(); ++k)
    if (std::abs(p.col(k).sum() - 1.0) > 1e-12) return "p";
  if (!p_raw.allFinite()) return "p_raw";
  if (model.mode == Mode::pcl) {
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
      const double q = model.dims[static_cast<std::size_t>(k)].q;
      if (!std::isfinite(alpha(k)) || alpha(k) <= 0.0 || alpha(k) > q) return "alpha";
    }
  }
  return {};
}

std::size_t PosteriorDraws::total_snapshots() const {
  std::size_t total = 0;
  for (const auto& chain : chains) total += chain.size();
  return total;
}

std::vector<const McmcState*> PosteriorDraws::pooled() const {
  std::vector<const McmcState*> out;
  out.reserve(total_snapshots());
  for (const auto& chain : chains)
    for (const auto& s : chain) out.push_back(&s);
  return out;
}

nlohmann::json to_json(const DimensionPrior& p) {
  nlohmann::json j{{"r", p.r},       {"scale_prior", to_string(p.scale_prior)},
                   {"beta", p.beta}, {"upper", p.upper},
                   {"q", p.q},       {"v", p.v},
                   {"z", p.z}};
  if (p.fixed_scale) j["fixed_scale"] = *p.fixed_scale;
  return j;
}

DimensionPrior dimension_prior_from_json(const nlohmann::json& j) {
  DimensionPrior p;
  p.r = j.at("r").get<double>();
  const auto scale = j.at("scale_prior").get<std::string>();
  if (scale == "gamma_precision")
    p.scale_prior = ScalePrior::gamma_precision;
  else if (scale == "uniform_sigma")
    p.scale_prior = ScalePrior::uniform_sigma;
  else
    throw ValidationError("unknown scale prior '" + scale + "'");
  p.beta = get_or(j, "beta", 1.0);
  p.upper = get_or(j, "upper", 1.0);
  p.q = j.at("q").get<double>();
  p.v = get_or(j, "v", 0.0);
  p.z = get_or(j, "z", 1.0);
  if (j.contains("fixed_scale")) p.fixed_scale = j.at("fixed_scale").get<double>();
  return p;
}

nlohmann::json to_json(const ModelConfig& m) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : m.dims) dims.push_back(to_json(d));
  nlohmann::json j{{"truncation", m.truncation}, {"dims", dims},
                   {"a_prime", m.a_prime},       {"b_prime", m.b_prime},
                   {"mode", to_string(m.mode)},  {"relabel", to_string(m.relabel)}};
  if (m.fixed_tau) j["fixed_tau"] = *m.fixed_tau;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig m;
  m.truncation = j.at("truncation").get<int>();
  for (const auto& d : j.at("dims")) m.dims.push_back(dimension_prior_from_json(d));
  m.a_prime = j.at("a_prime").get<double>();
  m.b_prime = j.at("b_prime").get<double>();
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "pcl")
    m.mode = Mode::pcl;
  else if (mode == "standard_bfpca")
    m.mode = Mode::standard_bfpca;
  else
    throw ValidationError("unknown mode '" + mode + "'");
  const auto relabel = get_or<std::string>(j, "relabel", "by_mean");
  if (relabel == "by_mean")
    m.relabel = Relabel::by_mean;
  else if (relabel == "by_weight")
    m.relabel = Relabel::by_weight;
  else
    throw ValidationError("unknown relabel rule '" + relabel + "'");
  if (j.contains("fixed_tau")) m.fixed_tau = j.at("fixed_tau").get<double>();
  return m;
}

nlohmann::json to_json(const McmcConfig& m) {
  return {{"burn_in", m.burn_in},   {"iterations", m.iterations}, {"thinning", m.thinning},
          {"chains", m.chains},     {"seed", m.seed}};
}

McmcConfig mcmc_config_from_json(const nlohmann::json& j) {
  McmcConfig m;
  m.burn_in = j.at("burn_in").get<int>();
  m.iterations = j.at("iterations").get<int>();
  m.thinning = j.at("thinning").get<int>();
  m.chains = j.at("chains").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  return m;
}

}  // namespace fpclust
