#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpclust/model.hpp"

namespace fpclust {

using Chains = std::vector<std::vector<double>>;
using ParameterSelector = std::function<double(const McmcState&)>;

namespace select {
ParameterSelector xi(Eigen::Index curve, int dimension);
ParameterSelector tau();
ParameterSelector alpha(int dimension);
}  // namespace select

/// Per-chain traces of one scalar parameter.
Chains extract(const PosteriorDraws& draws, const ParameterSelector& selector);

/// Split-chain Gelman-Rubin potential scale reduction. Values below one
/// (sampling noise when chains agree) are reported as one. NaN when the
/// within-chain variance is zero. Needs >= 2 chains of >= 10 draws.
double psrf(const Chains& chains);
double psrf(const PosteriorDraws& draws, const ParameterSelector& selector);

/// Multi-chain effective sample size with Geyer's initial monotone sequence
/// truncation of the autocorrelation sum; capped at the total draw count.
/// NaN for a constant trace. Needs >= 100 draws in total.
double ess(const Chains& chains);
double ess(const PosteriorDraws& draws, const ParameterSelector& selector);

struct ChainDiagnostics {
  std::vector<std::string> parameters;
  std::vector<double> psrf;
  std::vector<double> ess;
  std::vector<std::string> warnings;

  double mean_psrf() const;
  double psrf_quantile(double prob) const;
  double mean_ess() const;
  double ess_quantile(double prob) const;
};

/// PSRF (when there are >= 2 chains) and ESS for every score, tau and,
/// for the clustering model, every alpha. These are unaffected by the
/// relabelling of stored snapshots.
ChainDiagnostics chain_diagnostics(const PosteriorDraws& draws);

}  // namespace fpclust
