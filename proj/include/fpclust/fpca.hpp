#pragma once

#include <string>
#include <variant>

#include "json.hpp"

#include "fpclust/dataset.hpp"
#include "fpclust/linalg.hpp"

namespace fpclust {

/// How many leading eigendimensions to keep.
struct RetainThreshold {
  double fraction;  // smallest K whose cumulative share reaches this
};
struct RetainFixed {
  int k;
};
struct RetainThresholdMinShare {
  double fraction;
  double min_share;  // every retained component must explain at least this share
};
using RetainRule = std::variant<RetainThreshold, RetainFixed, RetainThresholdMinShare>;

std::string describe(const RetainRule& rule);
nlohmann::json to_json(const RetainRule& rule);
RetainRule retain_rule_from_json(const nlohmann::json& j);

/// Discrete Karhunen-Loeve basis of a centred curve ensemble.
struct FpcaBasis {
  Vector mean_curve;      // length T
  Matrix eigenfunctions;  // K x T, unit Euclidean norm rows
  Vector eigenvalues;     // length K, non-increasing
  Matrix scores;          // n x K empirical scores
  double total_variance = 0.0;
  // provenance
  int basis_size = 0;
  std::string retain_rule;

  int k() const noexcept { return static_cast<int>(eigenvalues.size()); }
  Eigen::Index time_points() const noexcept { return eigenfunctions.cols(); }
};

/// Chooses K from a full non-increasing spectrum.
int select_components(const Vector& spectrum, const RetainRule& rule);

/// Eigendecomposition of the T x T sample covariance (divisor n-1). Each
/// eigenvector is flipped so its largest-magnitude entry is positive.
FpcaBasis decompose(const CenteredDataset& centered, const RetainRule& rule);

/// Row i = mean_curve + sum_k scores(i,k) * phi_k.
Matrix reconstruct_from_scores(const FpcaBasis& basis, const Matrix& scores);

nlohmann::json to_json(const FpcaBasis& basis);
FpcaBasis basis_from_json(const nlohmann::json& j);

}  // namespace fpclust
