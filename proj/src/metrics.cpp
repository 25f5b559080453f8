#include "fpclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "fpclust/dataset.hpp"
#include "fpclust/error.hpp"
#include "fpclust/kernels.hpp"

namespace fpclust {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

double quantile(std::vector<double> v, double prob) {
  std::sort(v.begin(), v.end());
  return kernels::sorted_quantile(v.data(), v.size(), prob);
}

void require_square(const Matrix& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) throw DimensionError(std::string(name) + " must be " +
                                                           std::to_string(n) + "x" + std::to_string(n));
}

}  // namespace

Vector imse(const Matrix& estimate, const Matrix& truth) {
  require_same_shape(estimate, truth);
  return (estimate - truth).array().square().rowwise().mean();
}

Matrix row_correlations(const Matrix& curves, const char* what) {
  const Eigen::Index n = curves.rows();
  Matrix z = curves.colwise() - curves.rowwise().mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = z.row(i).norm();
    if (!(norm > 0.0))
      throw DimensionError(std::string("correlation undefined: ") + what + " row " + std::to_string(i + 1) +
                           " has zero variance");
    z.row(i) /= norm;
  }
  return z * z.transpose();
}

CorrelationError correlation_error(const Matrix& estimate, const Matrix& truth) {
  require_same_shape(estimate, truth);
  const Matrix re = row_correlations(estimate, "estimate");
  const Matrix rt = row_correlations(truth, "truth");
  CorrelationError out;
  double ss = 0.0;
  for (Eigen::Index i = 0; i < re.rows(); ++i)
    for (Eigen::Index j = i + 1; j < re.cols(); ++j) {
      const double d = re(i, j) - rt(i, j);
      ss += d * d;
      ++out.pairs;
    }
  out.l2 = std::sqrt(ss);
  out.rms = out.pairs > 0 ? out.l2 / std::sqrt(static_cast<double>(out.pairs)) : 0.0;
  return out;
}

double ari(const Eigen::Ref<const IntVector>& a, const Eigen::Ref<const IntVector>& b) {
  if (a.size() != b.size())
    throw DimensionError("partitions differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    cells[{a(i), b(i)}] += 1.0;
    rows[a(i)] += 1.0;
    cols[b(i)] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : cells) index += choose2(count);
  for (const auto& [key, count] : rows) sum_a += choose2(count);
  for (const auto& [key, count] : cols) sum_b += choose2(count);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = (sum_a + sum_b) / 2.0;
  // Both partitions trivial in the same way (all singletons or all one block).
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

Matrix adjacency(const Eigen::Ref<const IntVector>& partition) {
  const Eigen::Index n = partition.size();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = partition(i) == partition(j) ? 1.0 : 0.0;
  return g;
}

std::optional<double> cii(const Matrix& ppm_new, const Matrix& ppm_std, const Matrix& truth) {
  const Eigen::Index n = truth.rows();
  require_square(truth, n, "truth adjacency");
  require_square(ppm_new, n, "new co-clustering matrix");
  require_square(ppm_std, n, "standard co-clustering matrix");
  const double d_std = (ppm_std - truth).norm();
  if (!(d_std > 0.0)) return std::nullopt;
  return (d_std - (ppm_new - truth).norm()) / d_std;
}

std::optional<double> cii_lower_bound(const Matrix& ppm_std, const Matrix& truth) {
  Matrix complement = Matrix::Ones(truth.rows(), truth.cols()) - truth;
  complement.diagonal().setOnes();
  return cii(complement, ppm_std, truth);
}

Improvement improvement_report(const Vector& metric_new, const Vector& metric_baseline) {
  if (metric_new.size() != metric_baseline.size())
    throw DimensionError("metric vectors differ in length");
  if (metric_new.size() == 0) throw DimensionError("empty metric vectors");
  Improvement out;
  out.percent.resize(metric_new.size());
  int improved = 0;
  for (Eigen::Index i = 0; i < metric_new.size(); ++i) {
    if (!(metric_baseline(i) > 0.0))
      throw ValidationError("baseline metric of entry " + std::to_string(i + 1) + " is not positive");
    out.percent(i) = 100.0 * (metric_baseline(i) - metric_new(i)) / metric_baseline(i);
    if (metric_new(i) < metric_baseline(i)) ++improved;
  }
  std::vector<double> v(out.percent.data(), out.percent.data() + out.percent.size());
  out.median = quantile(v, 0.5);
  out.q25 = quantile(v, 0.25);
  out.q75 = quantile(v, 0.75);
  out.fraction_improved = static_cast<double>(improved) / static_cast<double>(metric_new.size());
  return out;
}

nlohmann::json to_json(const Improvement& imp) {
  return {{"median_percent", imp.median},
          {"q25_percent", imp.q25},
          {"q75_percent", imp.q75},
          {"iqr_percent", imp.iqr()},
          {"fraction_improved", imp.fraction_improved}};
}

namespace {
nlohmann::json to_json(const CorrelationError& e) {
  return {{"l2", e.l2}, {"root_mean", e.rms}, {"pairs", e.pairs}};
}
nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j;
  j["baseline"] = report.baseline;
  std::vector<double> im(report.imse.data(), report.imse.data() + report.imse.size());
  j["imse"] = im;
  std::vector<double> sorted = im;
  j["imse_median"] = quantile(sorted, 0.5);
  j["correlation_error"] = to_json(report.correlation);
  j["correlation_estimator"] = "Pearson correlation across time between posterior-mean reconstructed curves";
  if (report.baseline_imse) {
    std::vector<double> b(report.baseline_imse->data(), report.baseline_imse->data() + report.baseline_imse->size());
    j["baseline_imse"] = b;
    j["baseline_imse_median"] = quantile(b, 0.5);
  }
  if (report.baseline_correlation) j["baseline_correlation_error"] = to_json(*report.baseline_correlation);
  if (report.improvement) j["imse_improvement"] = to_json(*report.improvement);
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : report.dimensions)
    dims.push_back({{"dimension", d.dimension + 1}, {"ari", optional_number(d.ari)}, {"cii", optional_number(d.cii)}});
  j["dimensions"] = dims;
  return j;
}

void save_metric_csv(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "curve,imse,baseline_imse,improvement_percent\n";
  for (Eigen::Index i = 0; i < report.imse.size(); ++i) {
    out << i + 1 << ',' << format_double(report.imse(i)) << ',';
    if (report.baseline_imse) out << format_double((*report.baseline_imse)(i));
    out << ',';
    if (report.improvement) out << format_double(report.improvement->percent(i));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace fpclust
