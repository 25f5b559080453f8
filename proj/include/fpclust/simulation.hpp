#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "fpclust/dataset.hpp"
#include "fpclust/linalg.hpp"

namespace fpclust {

/// Orthonormal rows built from Gaussian-windowed sinusoids of increasing
/// frequency on [0, 1], orthonormalised by Gram-Schmidt.
Matrix make_eigenfunctions(Eigen::Index time_points, int count = 2);

/// Exponential (nu = 1/2) Matern covariance sigma2 * exp(-d / rho).
double matern_half(double d, double rho, double sigma2);

struct MixtureComponent {
  double mean;
  double sd;
  double share;  // fraction of curves, assigned as a contiguous block
};

struct MixtureScores {
  std::vector<MixtureComponent> components;
};

struct MaternScores {
  double rho;
  double sigma2;
  /// Curves sit at equally spaced locations on [0, span].
  double span = 1.0;
};

using ScoreGenerator = std::variant<MixtureScores, MaternScores>;

enum class DgpKind { dgp1, dgp2, dgp3 };

struct DgpSpec {
  DgpKind kind = DgpKind::dgp1;
  Eigen::Index n = 100;
  Eigen::Index time_points = 150;
  double stn = 6.0;
  std::vector<ScoreGenerator> dims;
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;

  /// Default score generators for the kind: dgp1 two mixtures, dgp2 Matern
  /// then mixture, dgp3 two Matern dimensions.
  static DgpSpec preset(DgpKind kind, double stn, std::uint64_t seed = 1, Eigen::Index n = 100,
                        Eigen::Index time_points = 150);
  void validate() const;
};

struct SimulatedDataset {
  FunctionalDataset observed;
  Matrix truth;
  /// Per dimension; nullopt for Matern dimensions.
  std::vector<std::optional<IntVector>> partitions;
  Matrix scores;
  Matrix eigenfunctions;
  double noise_sd = 0.0;
};

/// Contiguous block sizes for component shares; the last block takes the
/// rounding remainder.
std::vector<Eigen::Index> block_sizes(const std::vector<MixtureComponent>& components, Eigen::Index n);

/// Matern covariance over the curve locations of a dimension.
Matrix matern_covariance(const MaternScores& params, Eigen::Index n);

/// Draws are taken from stream `replicate` of `seed`.
SimulatedDataset generate(const DgpSpec& spec);

/// observed.csv, truth.csv, scores.csv, eigenfunctions.csv,
/// partitions.json (1-based labels) and spec.json.
void save_simulated(const SimulatedDataset& data, const DgpSpec& spec, const std::filesystem::path& dir);

struct TruthBundle {
  Matrix truth;
  std::vector<std::optional<IntVector>> partitions;  // 0-based
};

TruthBundle load_truth(const std::filesystem::path& dir);

std::string to_string(DgpKind kind);
DgpKind dgp_kind_from_string(const std::string& s);
nlohmann::json to_json(const DgpSpec& spec);
DgpSpec dgp_spec_from_json(const nlohmann::json& j);

}  // namespace fpclust
