#include "fpclust/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fpclust/bspline.hpp"
#include "fpclust/convergence.hpp"
#include "fpclust/diagnostics.hpp"
#include "fpclust/draws_io.hpp"
#include "fpclust/error.hpp"
#include "fpclust/hash.hpp"
#include "fpclust/kernels.hpp"
#include "fpclust/reconstruction.hpp"

namespace fpclust {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRunSchemaVersion = 1;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end())
      throw ValidationError("unknown " + where + " field '" + key + "'");
}

Presence presence_from_json(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return Presence::automatic;
  if (j.at(key).is_boolean()) return j.at(key).get<bool>() ? Presence::present : Presence::absent;
  const auto s = j.at(key).get<std::string>();
  if (s == "auto") return Presence::automatic;
  if (s == "present") return Presence::present;
  if (s == "absent") return Presence::absent;
  throw ValidationError(std::string("csv.") + key + " must be true, false or \"auto\"");
}

json presence_to_json(Presence p) {
  switch (p) {
    case Presence::present: return true;
    case Presence::absent: return false;
    case Presence::automatic: break;
  }
  return "auto";
}

Baseline baseline_from_string(const std::string& s) {
  if (s == "standard_bfpca" || s == "std") return Baseline::standard_bfpca;
  if (s == "frequentist_fpca" || s == "fpca") return Baseline::frequentist_fpca;
  throw ValidationError("unknown baseline '" + s + "'");
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void save_labels_csv(const std::vector<IntVector>& columns, const fs::path& path) {
  std::ostringstream out;
  out << "curve";
  for (std::size_t k = 0; k < columns.size(); ++k) out << ",k" << k + 1;
  out << '\n';
  const Eigen::Index n = columns.empty() ? 0 : columns.front().size();
  for (Eigen::Index i = 0; i < n; ++i) {
    out << i + 1;
    for (const auto& c : columns) out << ',' << c(i) + 1;
    out << '\n';
  }
  write_text(out.str(), path);
}

std::string format_fixed(double v, int precision = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void require_run(const fs::path& run_dir) {
  if (!fs::exists(run_dir / "manifest.json") || !fs::exists(run_dir / "draws" / "manifest.json"))
    throw IoError(run_dir.string() + " is not a run directory (missing manifest or draws)");
}

Matrix posterior_mean_curves(const fs::path& run_dir, const fs::path& draws_dir) {
  const FpcaBasis basis = basis_from_json(read_json(run_dir / "basis.json"));
  return reconstruct(load_draws(draws_dir), basis).mean;
}

}  // namespace

std::string to_string(LikelihoodData d) { return d == LikelihoodData::observed ? "observed" : "smoothed"; }

std::string to_string(Baseline b) {
  return b == Baseline::standard_bfpca ? "standard_bfpca" : "frequentist_fpca";
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  try {
    reject_unknown(j, {"input", "csv", "simulation", "smoothing", "likelihood", "retain", "model", "mcmc", "output", "baselines",
                       "threads"},
                   "run config");
    RunConfig c;
    if (j.contains("input") && !j.at("input").is_null()) {
      fs::path input = j.at("input").get<std::string>();
      if (input.is_relative() && !base_dir.empty()) input = base_dir / input;
      if (!fs::exists(input)) throw ValidationError("input file " + input.string() + " does not exist");
      c.input = input;
    }
    if (j.contains("simulation") && !j.at("simulation").is_null())
      c.simulation = dgp_spec_from_json(j.at("simulation"));
    if (c.input.has_value() == c.simulation.has_value())
      throw ValidationError("run config needs exactly one of 'input' and 'simulation'");
    if (j.contains("csv")) {
      const auto& csv = j.at("csv");
      reject_unknown(csv, {"header", "labels"}, "csv");
      c.csv.header = presence_from_json(csv, "header");
      c.csv.labels = presence_from_json(csv, "labels");
    }
    if (j.contains("smoothing")) {
      const auto& s = j.at("smoothing");
      reject_unknown(s, {"n_basis", "order"}, "smoothing");
      if (s.contains("n_basis") && !s.at("n_basis").is_null()) c.smoothing.n_basis = s.at("n_basis").get<int>();
      c.smoothing.order = s.value("order", 4);
      if (c.smoothing.order < 1) throw ValidationError("spline order must be positive");
      if (c.smoothing.n_basis && *c.smoothing.n_basis < c.smoothing.order)
        throw ValidationError("n_basis must be at least the spline order");
    }
    if (j.contains("likelihood")) {
      const auto l = j.at("likelihood").get<std::string>();
      if (l == "observed")
        c.likelihood = LikelihoodData::observed;
      else if (l == "smoothed")
        c.likelihood = LikelihoodData::smoothed;
      else
        throw ValidationError("likelihood must be \"observed\" or \"smoothed\"");
    }
    if (j.contains("retain")) c.retain = retain_rule_from_json(j.at("retain"));
    if (j.contains("model")) {
      c.model = j.at("model");
      if (!c.model.is_object()) throw ValidationError("model must be an object of overrides");
      reject_unknown(c.model, {"truncation", "dims", "a_prime", "b_prime", "mode", "relabel", "fixed_tau"}, "model");
    }
    if (j.contains("mcmc")) {
      const auto& m = j.at("mcmc");
      if (m.is_string()) {
        const auto preset = m.get<std::string>();
        if (preset == "desk")
          c.mcmc = McmcConfig::desk_scale();
        else if (preset == "paper")
          c.mcmc = McmcConfig::paper_scale();
        else
          throw ValidationError("unknown mcmc preset '" + preset + "'");
      } else {
        reject_unknown(m, {"burn_in", "iterations", "thinning", "chains", "seed"}, "mcmc");
        json merged = to_json(McmcConfig::desk_scale());
        merged.merge_patch(m);
        c.mcmc = mcmc_config_from_json(merged);
      }
    }
    c.mcmc.validate();
    if (!j.contains("output")) throw ValidationError("run config needs an 'output' directory");
    c.output = j.at("output").get<std::string>();
    if (j.contains("baselines"))
      for (const auto& b : j.at("baselines")) c.baselines.push_back(baseline_from_string(b.get<std::string>()));
    c.threads = j.value("threads", 0);
    if (c.threads < 0) throw ValidationError("threads must be non-negative");
    return c;
  } catch (const json::exception& e) {
    throw ValidationError("malformed run config: " + std::string(e.what()));
  }
}

json to_json(const RunConfig& c) {
  json j;
  if (c.input) j["input"] = c.input->string();
  if (c.simulation) j["simulation"] = to_json(*c.simulation);
  j["csv"] = {{"header", presence_to_json(c.csv.header)}, {"labels", presence_to_json(c.csv.labels)}};
  j["smoothing"] = {{"n_basis", c.smoothing.n_basis ? json(*c.smoothing.n_basis) : json(nullptr)},
                    {"order", c.smoothing.order}};
  j["likelihood"] = to_string(c.likelihood);
  j["retain"] = to_json(c.retain);
  j["model"] = c.model;
  j["mcmc"] = to_json(c.mcmc);
  j["output"] = c.output.string();
  json baselines = json::array();
  for (auto b : c.baselines) baselines.push_back(to_string(b));
  j["baselines"] = baselines;
  j["threads"] = c.threads;
  return j;
}

fs::path output_root_path(const fs::path& path) {
  const char* root = std::getenv("FPCLUST_OUTPUT_ROOT");
  if (root && *root && path.is_relative()) return fs::path(root) / path;
  return path;
}

void apply_environment(RunConfig& config) {
  config.output = output_root_path(config.output);
  if (const char* t = std::getenv("FPCLUST_THREADS"); t && *t) {
    char* end = nullptr;
    const long v = std::strtol(t, &end, 10);
    if (*end != '\0' || v < 0) throw ValidationError("FPCLUST_THREADS must be a non-negative integer");
    config.threads = static_cast<int>(v);
  }
}

PreparedData prepare(const FunctionalDataset& observed, const SmoothingSettings& smoothing, const RetainRule& retain,
                     LikelihoodData likelihood) {
  const int size = smoothing.n_basis.value_or(BSplineBasis::default_size(observed.time_points(), smoothing.order));
  const BSplineBasis spline(observed.grid(), size, smoothing.order);
  FunctionalDataset smoothed = smooth(observed, spline);
  CenteredDataset centered = center(smoothed);
  FpcaBasis basis = decompose(centered, retain);
  basis.basis_size = size;
  CenteredDataset sampler_input = centered;
  if (likelihood == LikelihoodData::observed)
    sampler_input.values = observed.values().rowwise() - centered.mean_curve.transpose();
  return {observed, std::move(smoothed), std::move(centered), std::move(sampler_input), std::move(basis)};
}

ModelConfig resolve_model(const FpcaBasis& basis, const json& overrides, std::optional<Mode> force_mode) {
  json merged = to_json(ModelConfig::defaults(basis));
  try {
    for (const auto& [key, value] : overrides.items()) {
      if (key != "dims") {
        merged[key] = value;
        continue;
      }
      if (!value.is_array()) throw ValidationError("model.dims must be an array");
      if (value.size() > merged["dims"].size())
        throw ValidationError("model.dims has " + std::to_string(value.size()) + " entries but only " +
                              std::to_string(merged["dims"].size()) + " eigendimensions are retained");
      for (std::size_t k = 0; k < value.size(); ++k) {
        if (!value[k].is_object()) throw ValidationError("model.dims entries must be objects");
        reject_unknown(value[k], {"r", "scale_prior", "beta", "upper", "q", "v", "z", "fixed_scale"}, "model.dims");
        merged["dims"][k].merge_patch(value[k]);
      }
    }
    if (force_mode) merged["mode"] = to_string(*force_mode);
    ModelConfig model = model_config_from_json(merged);
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ValidationError("malformed model overrides: " + std::string(e.what()));
  }
}

FitResult fit(const FunctionalDataset& observed, const RunConfig& config, const RunOptions& options) {
  PreparedData data = prepare(observed, config.smoothing, config.retain, config.likelihood);
  const ModelConfig model = resolve_model(data.basis, config.model);
  PosteriorDraws draws = run_sampler(data.sampler_input, data.basis, model, config.mcmc, options);
  std::optional<PosteriorDraws> standard;
  if (std::find(config.baselines.begin(), config.baselines.end(), Baseline::standard_bfpca) != config.baselines.end()) {
    const ModelConfig std_model = resolve_model(data.basis, config.model, Mode::standard_bfpca);
    standard = run_sampler(data.sampler_input, data.basis, std_model, config.mcmc, options);
  }
  return {std::move(data), std::move(draws), std::move(standard)};
}

json cmd_simulate(const DgpSpec& spec, int replicates, const fs::path& out) {
  spec.validate();
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  ensure_directory(out);
  std::vector<std::string> errors(static_cast<std::size_t>(replicates));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < replicates; ++r) {
    try {
      DgpSpec rep = spec;
      rep.replicate = static_cast<std::uint64_t>(r);
      fs::path dir = out;
      if (replicates > 1) {
        std::ostringstream name;
        name << "rep_" << std::setw(3) << std::setfill('0') << r + 1;
        dir = out / name.str();
      }
      save_simulated(generate(rep), rep, dir);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(r)] = e.what();
    }
  }
  for (int r = 0; r < replicates; ++r)
    if (!errors[static_cast<std::size_t>(r)].empty())
      throw IoError("replicate " + std::to_string(r + 1) + ": " + errors[static_cast<std::size_t>(r)]);
  json summary{{"spec", to_json(spec)}, {"replicates", replicates}};
  write_json(summary, out / "simulation.json");
  return summary;
}

json cmd_fit(const RunConfig& config) {
  ensure_directory(config.output);
  const json config_json = to_json(config);
  write_json(config_json, config.output / "config.json");

  std::optional<FunctionalDataset> observed;
  if (config.simulation) {
    const SimulatedDataset sim = generate(*config.simulation);
    save_simulated(sim, *config.simulation, config.output / "data");
    observed = sim.observed;
  } else {
    observed = load_dataset(*config.input, config.csv);
  }

  RunOptions options;
  options.threads = config.threads;
  if (config.threads > 0) kernels::set_threads(config.threads);
  const FitResult result = fit(*observed, config, options);

  write_json(to_json(result.data.basis), config.output / "basis.json");
  save_dataset(result.data.smoothed, config.output / "smoothed.csv");
  const json draws_manifest = save_draws(result.draws, config.output / "draws");

  json manifest{
      {"schema", "fpclust.run"},
      {"schema_version", kRunSchemaVersion},
      {"config_hash", git_blob_hash(config_json.dump())},
      {"data", {{"curves", result.data.observed.curves()}, {"time_points", result.data.observed.time_points()}}},
      {"smoothing", {{"n_basis", result.data.basis.basis_size}, {"order", config.smoothing.order}}},
      {"likelihood", to_string(config.likelihood)},
      {"retain_rule", result.data.basis.retain_rule},
      {"K", result.data.basis.k()},
      {"model", to_json(result.draws.model)},
      {"mcmc", to_json(result.draws.mcmc)},
      {"draws_hash", draws_manifest.at("draws_hash")},
  };
  if (config.input) manifest["input"] = config.input->string();
  if (config.simulation) manifest["truth"] = "data";
  if (result.standard) {
    const json std_manifest = save_draws(*result.standard, config.output / "standard_bfpca" / "draws");
    manifest["baselines"]["standard_bfpca"] = {{"path", "standard_bfpca/draws"},
                                               {"draws_hash", std_manifest.at("draws_hash")}};
  }
  write_json(manifest, config.output / "manifest.json");
  return manifest;
}

std::string cmd_diagnose(const fs::path& run_dir, int prior_simulations, std::uint64_t seed) {
  require_run(run_dir);
  const PosteriorDraws draws = load_draws(run_dir / "draws");
  const ClusteringPosterior clustering = summarize_clustering(draws, prior_simulations, seed);
  const ChainDiagnostics chains = chain_diagnostics(draws);

  json out = to_json(clustering);
  out["mode"] = to_string(draws.model.mode);
  out["label_base"] = 1;
  out["convergence"] = {
      {"psrf_mean", chains.mean_psrf()},   {"psrf_q975", chains.psrf_quantile(0.975)},
      {"ess_mean", chains.mean_ess()},     {"ess_q025", chains.ess_quantile(0.025)},
      {"ess_q975", chains.ess_quantile(0.975)}, {"warnings", chains.warnings},
  };
  json per_param = json::array();
  for (std::size_t i = 0; i < chains.parameters.size(); ++i)
    per_param.push_back({{"parameter", chains.parameters[i]},
                         {"psrf", std::isfinite(chains.psrf[i]) ? json(chains.psrf[i]) : json(nullptr)},
                         {"ess", std::isfinite(chains.ess[i]) ? json(chains.ess[i]) : json(nullptr)}});
  out["convergence"]["parameters"] = per_param;
  write_json(out, run_dir / "diagnostics.json");

  std::vector<IntVector> maps;
  for (const auto& d : clustering.dims) {
    save_matrix_csv(d.ppm, run_dir / ("ppm_k" + std::to_string(d.dimension + 1) + ".csv"));
    maps.push_back(d.map);
  }
  save_labels_csv(maps, run_dir / "map.csv");

  std::ostringstream r;
  r << "Clustering diagnostics (" << to_string(draws.model.mode) << ", " << draws.total_snapshots()
    << " pooled snapshots from " << draws.chains.size() << " chains)\n\n";
  r << "dim  J+ mode  P(J+=1)  prior P(J+=1)  BF(single)\n";
  for (const auto& d : clustering.dims) {
    std::string bf;
    switch (d.bayes_factor.status) {
      case BayesFactorStatus::finite: bf = format_fixed(d.bayes_factor.value); break;
      case BayesFactorStatus::infinite: bf = "inf"; break;
      case BayesFactorStatus::undefined: bf = "undefined"; break;
    }
    r << std::setw(3) << d.dimension + 1 << "  " << std::setw(7) << d.jplus.mode() << "  " << std::setw(7)
      << format_fixed(d.jplus.probability(1)) << "  " << std::setw(13) << format_fixed(d.bayes_factor.prior_single, 4)
      << "  " << bf << '\n';
  }
  r << "\nCluster sizes (share of curves at the posterior mode, P(empty))\n";
  for (const auto& d : clustering.dims) {
    r << "  dim " << d.dimension + 1 << ":";
    for (const auto& s : d.sizes) {
      if (s.empty_probability >= 0.5) continue;
      const auto best = std::max_element(s.mass.begin(), s.mass.end()) - s.mass.begin();
      r << "  #" << s.cluster + 1 << " " << format_fixed(s.fractions[best], 2) << " ("
        << format_fixed(s.empty_probability, 2) << ")";
    }
    r << '\n';
  }
  r << "\nConvergence\n";
  r << "  PSRF mean = " << format_fixed(chains.mean_psrf()) << ", 97.5% = " << format_fixed(chains.psrf_quantile(0.975))
    << '\n';
  r << "  ESS mean = " << format_fixed(chains.mean_ess(), 1) << ", 2.5% = " << format_fixed(chains.ess_quantile(0.025), 1)
    << ", 97.5% = " << format_fixed(chains.ess_quantile(0.975), 1) << '\n';
  for (const auto& w : chains.warnings) r << "  warning: " << w << '\n';
  const std::string report = r.str();
  write_text(report, run_dir / "report.txt");
  return report;
}

void cmd_reconstruct(const fs::path& run_dir, double level) {
  require_run(run_dir);
  const FpcaBasis basis = basis_from_json(read_json(run_dir / "basis.json"));
  const Reconstruction rec = reconstruct(load_draws(run_dir / "draws"), basis, level);
  save_matrix_csv(rec.mean, run_dir / "reconstruction_mean.csv");
  save_matrix_csv(rec.lower, run_dir / "reconstruction_lower.csv");
  save_matrix_csv(rec.upper, run_dir / "reconstruction_upper.csv");
  write_json({{"level", level}, {"pooled_snapshots", load_draws(run_dir / "draws").total_snapshots()}},
             run_dir / "reconstruction.json");
}

MetricReport cmd_evaluate(const fs::path& run_dir, const std::optional<fs::path>& truth_dir,
                          const std::string& baseline) {
  require_run(run_dir);
  const fs::path truth_path = truth_dir.value_or(run_dir / "data");
  if (!fs::exists(truth_path / "truth.csv")) throw IoError("no truth.csv in " + truth_path.string());
  const TruthBundle truth = load_truth(truth_path);
  const FpcaBasis basis = basis_from_json(read_json(run_dir / "basis.json"));
  const PosteriorDraws draws = load_draws(run_dir / "draws");
  const Matrix estimate = reconstruct(draws, basis).mean;
  if (estimate.rows() != truth.truth.rows() || estimate.cols() != truth.truth.cols())
    throw DimensionError("run reconstructs " + std::to_string(estimate.rows()) + "x" + std::to_string(estimate.cols()) +
                         " curves but the truth is " + std::to_string(truth.truth.rows()) + "x" +
                         std::to_string(truth.truth.cols()));

  MetricReport report;
  report.baseline = baseline;
  report.imse = imse(estimate, truth.truth);
  report.correlation = correlation_error(estimate, truth.truth);

  std::optional<Matrix> base_estimate;
  std::optional<PosteriorDraws> std_draws;
  if (baseline == "std") {
    const fs::path dir = run_dir / "standard_bfpca" / "draws";
    if (!fs::exists(dir / "manifest.json"))
      throw IoError("run has no standard_bfpca baseline; refit with the standard_bfpca baseline enabled");
    std_draws = load_draws(dir);
    base_estimate = reconstruct(*std_draws, basis).mean;
  } else if (baseline == "fpca") {
    base_estimate = reconstruct_empirical(basis);
  } else if (baseline != "none") {
    const fs::path other = baseline;
    require_run(other);
    base_estimate = posterior_mean_curves(other, other / "draws");
  }
  if (base_estimate) {
    report.baseline_imse = imse(*base_estimate, truth.truth);
    report.baseline_correlation = correlation_error(*base_estimate, truth.truth);
    report.improvement = improvement_report(report.imse, *report.baseline_imse);
  }

  const int dims = std::min<int>(draws.model.k(), static_cast<int>(truth.partitions.size()));
  for (int k = 0; k < dims; ++k) {
    DimensionScore score;
    score.dimension = k;
    const auto labels = dimension_labels(draws, k);
    const Matrix ppm = pairwise_probability_matrix(labels);
    if (truth.partitions[k]) {
      score.ari = ari(map_partition(labels), *truth.partitions[k]);
      const Matrix g = adjacency(*truth.partitions[k]);
      const Matrix ppm_std = std_draws ? pairwise_probability_matrix(dimension_labels(*std_draws, k))
                                       : Matrix::Ones(draws.n, draws.n).eval();
      score.cii = cii(ppm, ppm_std, g);
    }
    report.dimensions.push_back(score);
  }

  json j = to_json(report);
  j["truth"] = truth_path.string();
  write_json(j, run_dir / "metrics.json");
  save_metric_csv(report, run_dir / "metrics.csv");
  return report;
}

}  // namespace fpclust
