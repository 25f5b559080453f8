#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "fpclust/dataset.hpp"
#include "fpclust/fpca.hpp"
#include "fpclust/gibbs.hpp"
#include "fpclust/metrics.hpp"
#include "fpclust/model.hpp"
#include "fpclust/simulation.hpp"

namespace fpclust {

enum class Baseline { standard_bfpca, frequentist_fpca };

/// Data entering the sampler's likelihood. `observed`: raw curves minus the
/// smoothed mean curve; `smoothed`: the smoothed, centred curves.
enum class LikelihoodData { observed, smoothed };

struct SmoothingSettings {
  std::optional<int> n_basis;  // default BSplineBasis::default_size
  int order = 4;
};

struct RunConfig {
  std::optional<std::filesystem::path> input;
  CsvOptions csv;
  std::optional<DgpSpec> simulation;
  SmoothingSettings smoothing;
  LikelihoodData likelihood = LikelihoodData::observed;
  RetainRule retain = RetainThreshold{0.95};
  /// Merged over the data-driven model defaults (see resolve_model).
  nlohmann::json model = nlohmann::json::object();
  McmcConfig mcmc = McmcConfig::desk_scale();
  std::filesystem::path output;
  std::vector<Baseline> baselines;
  int threads = 0;
};

/// Parses and validates a run configuration. Unknown keys are rejected.
/// Relative input paths are resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& config);

/// FPCLUST_OUTPUT_ROOT prefixes relative output directories and
/// FPCLUST_THREADS sets the thread count.
void apply_environment(RunConfig& config);
std::filesystem::path output_root_path(const std::filesystem::path& path);

struct PreparedData {
  FunctionalDataset observed;
  FunctionalDataset smoothed;
  CenteredDataset centered;  // smoothed curves, centred
  CenteredDataset sampler_input;
  FpcaBasis basis;
};

/// B-spline smoothing, centring and fPCA.
PreparedData prepare(const FunctionalDataset& observed, const SmoothingSettings& smoothing,
                     const RetainRule& retain, LikelihoodData likelihood = LikelihoodData::observed);

/// Default priors from the basis eigenvalues, then `overrides` merged on top:
/// top-level keys replace, "dims" entries are merged per dimension.
ModelConfig resolve_model(const FpcaBasis& basis, const nlohmann::json& overrides,
                          std::optional<Mode> force_mode = std::nullopt);

struct FitResult {
  PreparedData data;
  PosteriorDraws draws;
  std::optional<PosteriorDraws> standard;  // present with the standard_bfpca baseline
};

FitResult fit(const FunctionalDataset& observed, const RunConfig& config, const RunOptions& options = {});

/// Writes one dataset directory, or `replicates` numbered subdirectories.
nlohmann::json cmd_simulate(const DgpSpec& spec, int replicates, const std::filesystem::path& out);

/// Runs the sampler and writes the run directory: config.json, basis.json,
/// smoothed.csv, draws/, optional standard_bfpca/draws/, data/ for simulated
/// input, and manifest.json. Returns the manifest.
nlohmann::json cmd_fit(const RunConfig& config);

/// Writes diagnostics.json, ppm_k<k>.csv, map.csv and report.txt into the run
/// directory and returns the report text.
std::string cmd_diagnose(const std::filesystem::path& run_dir, int prior_simulations = 100000,
                         std::uint64_t seed = 1);

/// Writes reconstruction_{mean,lower,upper}.csv.
void cmd_reconstruct(const std::filesystem::path& run_dir, double level = 0.95);

/// Scores the run against a truth directory (default: the run's data/).
/// `baseline` is "std" (the run's standard_bfpca draws), "fpca" (empirical
/// scores), "none", or the path of another run directory.
MetricReport cmd_evaluate(const std::filesystem::path& run_dir,
                          const std::optional<std::filesystem::path>& truth_dir,
                          const std::string& baseline = "std");

std::string to_string(Baseline b);
std::string to_string(LikelihoodData d);

}  // namespace fpclust
