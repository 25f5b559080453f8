#include "fpclust/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fpclust/error.hpp"
#include "fpclust/kernels.hpp"

namespace fpclust {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& x, std::size_t begin, std::size_t end) {
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) sum += x[i];
  return sum / static_cast<double>(end - begin);
}

double variance_of(const std::vector<double>& x, std::size_t begin, std::size_t end, double mean) {
  double ss = 0.0;
  for (std::size_t i = begin; i < end; ++i) ss += (x[i] - mean) * (x[i] - mean);
  return ss / static_cast<double>(end - begin - 1);
}

std::vector<double> finite_sorted(const std::vector<double>& values) {
  std::vector<double> out;
  std::copy_if(values.begin(), values.end(), std::back_inserter(out),
               [](double v) { return std::isfinite(v); });
  std::sort(out.begin(), out.end());
  return out;
}

double mean_finite(const std::vector<double>& values) {
  auto v = finite_sorted(values);
  if (v.empty()) return kNaN;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double quantile_finite(const std::vector<double>& values, double prob) {
  auto v = finite_sorted(values);
  if (v.empty()) return kNaN;
  return kernels::sorted_quantile(v.data(), v.size(), prob);
}

}  // namespace

namespace select {
ParameterSelector xi(Eigen::Index curve, int dimension) {
  return [=](const McmcState& s) { return s.xi(curve, dimension); };
}
ParameterSelector tau() {
  return [](const McmcState& s) { return s.tau; };
}
ParameterSelector alpha(int dimension) {
  return [=](const McmcState& s) { return s.alpha(dimension); };
}
}  // namespace select

Chains extract(const PosteriorDraws& draws, const ParameterSelector& selector) {
  Chains out;
  out.reserve(draws.chains.size());
  for (const auto& chain : draws.chains) {
    std::vector<double> trace;
    trace.reserve(chain.size());
    for (const auto& s : chain) trace.push_back(selector(s));
    out.push_back(std::move(trace));
  }
  return out;
}

double psrf(const Chains& chains) {
  if (chains.size() < 2) throw DimensionError("PSRF needs at least 2 chains");
  std::size_t length = chains.front().size();
  for (const auto& c : chains) length = std::min(length, c.size());
  if (length < 10) throw DimensionError("PSRF needs at least 10 draws per chain");

  const std::size_t half = length / 2;
  std::vector<double> means;
  std::vector<double> variances;
  for (const auto& c : chains) {
    // Halves of the last 2*half draws of each chain.
    const std::size_t start = c.size() - 2 * half;
    for (std::size_t part = 0; part < 2; ++part) {
      const std::size_t b = start + part * half;
      const double m = mean_of(c, b, b + half);
      means.push_back(m);
      variances.push_back(variance_of(c, b, b + half, m));
    }
  }
  const double within = std::accumulate(variances.begin(), variances.end(), 0.0) /
                        static_cast<double>(variances.size());
  if (!(within > 0.0)) return kNaN;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  double between = 0.0;
  for (double m : means) between += (m - grand) * (m - grand);
  between *= static_cast<double>(half) / static_cast<double>(means.size() - 1);
  const double n = static_cast<double>(half);
  const double pooled = (n - 1.0) / n * within + between / n;
  return std::sqrt(std::max(pooled / within, 1.0));
}

double psrf(const PosteriorDraws& draws, const ParameterSelector& selector) {
  return psrf(extract(draws, selector));
}

double ess(const Chains& chains) {
  if (chains.empty()) throw DimensionError("ESS needs at least one chain");
  std::size_t length = chains.front().size();
  for (const auto& c : chains) length = std::min(length, c.size());
  const std::size_t m_count = chains.size();
  const double total = static_cast<double>(length * m_count);
  if (total < 100) throw DimensionError("ESS needs at least 100 draws");

  std::vector<double> means(m_count);
  std::vector<double> variances(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    means[m] = mean_of(chains[m], 0, length);
    variances[m] = variance_of(chains[m], 0, length, means[m]);
  }
  const double within = std::accumulate(variances.begin(), variances.end(), 0.0) / static_cast<double>(m_count);
  if (!(within > 0.0)) return kNaN;
  double between = 0.0;
  if (m_count > 1) {
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m_count);
    for (double m : means) between += (m - grand) * (m - grand);
    between *= static_cast<double>(length) / static_cast<double>(m_count - 1);
  }
  const double n = static_cast<double>(length);
  const double pooled = (n - 1.0) / n * within + between / n;

  // rho_t = 1 - (W - mean_m acov_m(t)) / var+, acov with divisor n.
  auto rho = [&](std::size_t lag) {
    double acov = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
      const auto& x = chains[m];
      double sum = 0.0;
      for (std::size_t s = 0; s + lag < length; ++s) sum += (x[s] - means[m]) * (x[s + lag] - means[m]);
      acov += sum / n;
    }
    acov /= static_cast<double>(m_count);
    return 1.0 - (within * (n - 1.0) / n - acov) / pooled;
  };

  // Geyer: sums of adjacent pairs, truncated at the first non-positive
  // pair and forced to be non-increasing.
  double tau_sum = 0.0;
  double previous_pair = std::numeric_limits<double>::infinity();
  for (std::size_t lag = 0; lag + 1 < length; lag += 2) {
    double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, previous_pair);
    previous_pair = pair;
    tau_sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * tau_sum, 1.0 / std::log10(total));
  return std::min(total / tau, total);
}

double ess(const PosteriorDraws& draws, const ParameterSelector& selector) {
  return ess(extract(draws, selector));
}

double ChainDiagnostics::mean_psrf() const { return mean_finite(psrf); }
double ChainDiagnostics::psrf_quantile(double prob) const { return quantile_finite(psrf, prob); }
double ChainDiagnostics::mean_ess() const { return mean_finite(ess); }
double ChainDiagnostics::ess_quantile(double prob) const { return quantile_finite(ess, prob); }

ChainDiagnostics chain_diagnostics(const PosteriorDraws& draws) {
  ChainDiagnostics out;
  std::vector<std::pair<std::string, ParameterSelector>> params;
  for (Eigen::Index i = 0; i < draws.n; ++i)
    for (int k = 0; k < draws.model.k(); ++k)
      params.emplace_back("xi[" + std::to_string(i + 1) + "," + std::to_string(k + 1) + "]",
                          select::xi(i, k));
  params.emplace_back("tau", select::tau());
  if (draws.model.mode == Mode::pcl)
    for (int k = 0; k < draws.model.k(); ++k)
      params.emplace_back("alpha[" + std::to_string(k + 1) + "]", select::alpha(k));

  const bool multi = draws.chains.size() >= 2;
  const std::size_t length = draws.chains.empty() ? 0 : draws.chains.front().size();
  for (const auto& [name, selector] : params) {
    const Chains chains = extract(draws, selector);
    out.parameters.push_back(name);
    double r = kNaN;
    if (multi && length >= 10) r = psrf(chains);
    double e = kNaN;
    if (length * chains.size() >= 100) e = ess(chains);
    if (multi && std::isnan(r)) out.warnings.push_back(name + ": zero within-chain variance, PSRF undefined");
    if (std::isnan(e) && length * chains.size() >= 100)
      out.warnings.push_back(name + ": constant trace, ESS undefined");
    out.psrf.push_back(r);
    out.ess.push_back(e);
  }
  return out;
}

}  // namespace fpclust
