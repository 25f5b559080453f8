#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fpclust/linalg.hpp"

namespace fpclust {

/// Strictly increasing time stamps with at least four points.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// Grid 1, 2, ..., length.
  static TimeGrid unit_spaced(std::size_t length);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double operator[](std::size_t t) const { return points_[t]; }

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> points_;
};

/// n curves (rows) observed on a common grid (columns).
class FunctionalDataset {
 public:
  FunctionalDataset(Matrix values, TimeGrid grid,
                    std::optional<std::vector<std::string>> labels = std::nullopt);

  const Matrix& values() const noexcept { return values_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const std::optional<std::vector<std::string>>& labels() const noexcept { return labels_; }

  Eigen::Index curves() const noexcept { return values_.rows(); }
  Eigen::Index time_points() const noexcept { return values_.cols(); }

  /// Same grid and labels, new values of identical shape.
  FunctionalDataset with_values(Matrix values) const;

 private:
  Matrix values_;
  TimeGrid grid_;
  std::optional<std::vector<std::string>> labels_;
};

/// Column-centred data together with the subtracted mean curve.
struct CenteredDataset {
  Matrix values;
  Vector mean_curve;
};

CenteredDataset center(const FunctionalDataset& dataset);
CenteredDataset center(const Matrix& values);

enum class Presence { automatic, present, absent };

struct CsvOptions {
  Presence header = Presence::automatic;
  Presence labels = Presence::automatic;
};

/// Rows are curves, columns time points. An optional first header row holds
/// time stamps and an optional first column holds curve labels. When left
/// automatic, a label column is assumed if the first cell of the last row is
/// not numeric, and a header row is assumed if the top-left cell is empty or
/// one of "label", "id", "name", "curve", "region", "time", "t".
FunctionalDataset load_dataset(const std::filesystem::path& path, const CsvOptions& options = {});
FunctionalDataset parse_dataset(const std::string& text, const CsvOptions& options = {});

/// Writes a header row ("label", t_1, ..., t_T) and a label column; values
/// use 17 significant digits so that a reload is bit-identical.
void save_dataset(const FunctionalDataset& dataset, const std::filesystem::path& path);

/// Plain numeric matrix CSV without header or labels.
void save_matrix_csv(const Matrix& m, const std::filesystem::path& path);
Matrix load_matrix_csv(const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace fpclust
