#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "fpclust/linalg.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("fpclust_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Sample mean and unbiased variance.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  m.count = x.size();
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
  m.variance /= static_cast<double>(x.size() - 1);
  return m;
}

/// |sample mean - mean| within `z` standard errors of an iid sample.
inline bool mean_matches(const std::vector<double>& x, double mean, double variance, double z = 3.0) {
  const auto m = moments(x);
  return std::abs(m.mean - mean) <= z * std::sqrt(variance / static_cast<double>(x.size()));
}

/// |sample variance - variance| within `z` standard errors, using the sample
/// fourth central moment for the standard error.
inline bool variance_matches(const std::vector<double>& x, double variance, double z = 3.0) {
  const auto m = moments(x);
  double m4 = 0.0;
  for (double v : x) m4 += std::pow(v - m.mean, 4);
  m4 /= static_cast<double>(x.size());
  const double se = std::sqrt((m4 - m.variance * m.variance) / static_cast<double>(x.size()));
  return std::abs(m.variance - variance) <= z * se;
}

inline fpclust::Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::srand(seed);
  return fpclust::Matrix::Random(rows, cols);
}

}  // namespace testing
