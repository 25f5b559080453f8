#include "fpclust/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpclust/error.hpp"

namespace fpclust {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::optional<double> to_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::vector<std::vector<std::string>> split_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (first_line && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    first_line = false;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool is_header_keyword(std::string cell) {
  std::transform(cell.begin(), cell.end(), cell.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  static const char* const keywords[] = {"",     "label",  "labels", "id", "name",
                                         "curve", "region", "time",   "t"};
  return std::any_of(std::begin(keywords), std::end(keywords),
                     [&](const char* k) { return cell == k; });
}

}  // namespace

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 4)
    throw DimensionError("time grid needs at least 4 points, got " + std::to_string(points_.size()));
  for (std::size_t t = 0; t < points_.size(); ++t) {
    if (!std::isfinite(points_[t])) throw ValidationError("time grid contains a non-finite stamp");
    if (t > 0 && !(points_[t] > points_[t - 1]))
      throw ValidationError("time grid must be strictly increasing (index " + std::to_string(t) +
                            ")");
  }
}

TimeGrid TimeGrid::unit_spaced(std::size_t length) {
  std::vector<double> points(length);
  for (std::size_t t = 0; t < length; ++t) points[t] = static_cast<double>(t + 1);
  return TimeGrid(std::move(points));
}

FunctionalDataset::FunctionalDataset(Matrix values, TimeGrid grid,
                                     std::optional<std::vector<std::string>> labels)
    : values_(std::move(values)), grid_(std::move(grid)), labels_(std::move(labels)) {
  if (values_.rows() < 2)
    throw DimensionError("dataset needs at least 2 curves, got " + std::to_string(values_.rows()));
  if (static_cast<std::size_t>(values_.cols()) != grid_.size())
    throw DimensionError("dataset has " + std::to_string(values_.cols()) +
                         " columns but the time grid has " + std::to_string(grid_.size()) +
                         " points");
  if (!values_.allFinite()) throw ValidationError("dataset contains non-finite values");
  if (labels_ && static_cast<Eigen::Index>(labels_->size()) != values_.rows())
    throw DimensionError("label count does not match curve count");
}

FunctionalDataset FunctionalDataset::with_values(Matrix values) const {
  if (values.rows() != values_.rows() || values.cols() != values_.cols())
    throw DimensionError("replacement values change the dataset shape");
  return FunctionalDataset(std::move(values), grid_, labels_);
}

CenteredDataset center(const Matrix& values) {
  Vector mean = values.colwise().mean().transpose();
  Matrix centred = values.rowwise() - mean.transpose();
  return {std::move(centred), std::move(mean)};
}

CenteredDataset center(const FunctionalDataset& dataset) { return center(dataset.values()); }

FunctionalDataset parse_dataset(const std::string& text, const CsvOptions& options) {
  auto rows = split_rows(text);
  if (rows.empty()) throw FormatError("empty CSV input");

  bool has_labels = false;
  switch (options.labels) {
    case Presence::present: has_labels = true; break;
    case Presence::absent: has_labels = false; break;
    case Presence::automatic: has_labels = !to_number(rows.back().front()).has_value(); break;
  }
  bool has_header = false;
  switch (options.header) {
    case Presence::present: has_header = true; break;
    case Presence::absent: has_header = false; break;
    case Presence::automatic:
      has_header = rows.size() > 1 && is_header_keyword(rows.front().front());
      if (has_header && !has_labels && !to_number(rows.front().front())) has_labels = true;
      break;
  }

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw FormatError("ragged CSV: row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " cells, expected " +
                        std::to_string(width));

  const std::size_t offset = has_labels ? 1 : 0;
  if (width <= offset) throw FormatError("CSV has no value columns");
  const std::size_t n_time = width - offset;
  if (n_time < 4)
    throw DimensionError("need at least 4 time points, got " + std::to_string(n_time));

  std::vector<double> stamps;
  std::size_t first_data_row = 0;
  if (has_header) {
    first_data_row = 1;
    for (std::size_t c = offset; c < width; ++c) {
      auto v = to_number(rows[0][c]);
      if (!v) throw ParseError(1, c + 1, rows[0][c]);
      stamps.push_back(*v);
    }
  }
  const std::size_t n_curves = rows.size() - first_data_row;
  Matrix values(static_cast<Eigen::Index>(n_curves), static_cast<Eigen::Index>(n_time));
  std::vector<std::string> labels;
  for (std::size_t r = first_data_row; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r - first_data_row);
    if (has_labels) labels.push_back(rows[r][0]);
    for (std::size_t c = offset; c < width; ++c) {
      auto v = to_number(rows[r][c]);
      if (!v) throw ParseError(r + 1, c + 1, rows[r][c]);
      values(i, static_cast<Eigen::Index>(c - offset)) = *v;
    }
  }
  TimeGrid grid = has_header ? TimeGrid(std::move(stamps)) : TimeGrid::unit_spaced(n_time);
  std::optional<std::vector<std::string>> label_opt;
  if (has_labels) label_opt = std::move(labels);
  return FunctionalDataset(std::move(values), std::move(grid), std::move(label_opt));
}

FunctionalDataset load_dataset(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), options);
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void save_dataset(const FunctionalDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "label";
  for (double t : dataset.grid().points()) out << ',' << format_double(t);
  out << '\n';
  const Matrix& v = dataset.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    if (dataset.labels())
      out << (*dataset.labels())[static_cast<std::size_t>(i)];
    else
      out << "curve_" << (i + 1);
    for (Eigen::Index t = 0; t < v.cols(); ++t) out << ',' << format_double(v(i, t));
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void save_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto rows = split_rows(buffer.str());
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw FormatError("ragged matrix CSV " + path.string() + " at row " + std::to_string(r + 1));
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      auto v = to_number(rows[r][c]);
      if (!v) throw ParseError(r + 1, c + 1, rows[r][c]);
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return m;
}

}  // namespace fpclust
