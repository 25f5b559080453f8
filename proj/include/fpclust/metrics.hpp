#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "fpclust/linalg.hpp"

namespace fpclust {

/// Per-curve mean squared error over time, (1/T) sum_t (est - truth)^2.
Vector imse(const Matrix& estimate, const Matrix& truth);

struct CorrelationError {
  double l2 = 0.0;    // Euclidean norm over all pairs i < i'
  double rms = 0.0;   // l2 / sqrt(number of pairs)
  Eigen::Index pairs = 0;
};

/// Compares Pearson correlations across time between every pair of curves
/// in the estimate and in the truth.
CorrelationError correlation_error(const Matrix& estimate, const Matrix& truth);

/// Pearson correlation matrix between rows (correlation across columns).
Matrix row_correlations(const Matrix& curves, const char* what = "curves");

/// Hubert-Arabie adjusted Rand index. Labels may be arbitrary integers.
double ari(const Eigen::Ref<const IntVector>& a, const Eigen::Ref<const IntVector>& b);

/// G(i, i') = 1 when items share a label.
Matrix adjacency(const Eigen::Ref<const IntVector>& partition);

/// Relative Frobenius-distance reduction of a new co-clustering matrix over
/// the standard model's, both measured against the truth adjacency.
/// nullopt when the standard matrix already equals the truth.
std::optional<double> cii(const Matrix& ppm_new, const Matrix& ppm_std, const Matrix& truth);

/// Value taken by cii when ppm_new is the complement of the truth.
std::optional<double> cii_lower_bound(const Matrix& ppm_std, const Matrix& truth);

struct Improvement {
  Vector percent;  // 100 (baseline - new) / baseline per entry
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double fraction_improved = 0.0;  // share of entries with new < baseline

  double iqr() const { return q75 - q25; }
};

Improvement improvement_report(const Vector& metric_new, const Vector& metric_baseline);

struct DimensionScore {
  int dimension = 0;  // 0-based
  std::optional<double> ari;
  std::optional<double> cii;
};

struct MetricReport {
  std::string baseline;
  Vector imse;
  std::optional<Vector> baseline_imse;
  std::optional<Improvement> improvement;
  CorrelationError correlation;
  std::optional<CorrelationError> baseline_correlation;
  std::vector<DimensionScore> dimensions;
};

nlohmann::json to_json(const Improvement& imp);
nlohmann::json to_json(const MetricReport& report);
/// One row per curve: curve, imse, baseline_imse, improvement_percent.
void save_metric_csv(const MetricReport& report, const std::filesystem::path& path);

}  // namespace fpclust
