// fpclust command-line driver: simulate, fit, diagnose, reconstruct, evaluate.

#include <iostream>

#include "CLI11.hpp"
#include "fpclust/draws_io.hpp"
#include "fpclust/error.hpp"
#include "fpclust/pipeline.hpp"

namespace fs = std::filesystem;
using namespace fpclust;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering of functional principal component scores"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate synthetic datasets with known truth");
  std::string dgp = "1";
  double stn = 6.0;
  std::uint64_t sim_seed = 1;
  Eigen::Index sim_n = 100, sim_t = 150;
  int replicates = 1;
  std::string sim_out, sim_spec;
  sim->add_option("--dgp", dgp, "Data-generating process: 1, 2 or 3")->capture_default_str();
  sim->add_option("--stn", stn, "Signal-to-noise variance ratio")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
  sim->add_option("--n", sim_n, "Number of curves")->capture_default_str();
  sim->add_option("--T", sim_t, "Time points per curve")->capture_default_str();
  sim->add_option("--replicates", replicates, "Number of datasets")->capture_default_str();
  sim->add_option("--spec", sim_spec, "JSON simulation spec (overrides the other flags)");
  sim->add_option("--out", sim_out, "Output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Smooth, decompose and run the sampler");
  std::string config_path, fit_out;
  bool paper_scale = false;
  std::vector<std::string> baselines;
  std::optional<std::uint64_t> fit_seed;
  std::optional<int> fit_threads;
  fit->add_option("config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  fit->add_flag("--paper-scale", paper_scale, "100k burn-in, 100k iterations, thinning 5, 3 chains");
  fit->add_option("--baseline", baselines, "Also fit a baseline: std (standard_bfpca) or fpca");
  fit->add_option("--seed", fit_seed, "Override the MCMC seed");
  fit->add_option("--threads", fit_threads, "Worker threads (0 = OpenMP default)");
  fit->add_option("--out", fit_out, "Override the output directory");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Bayes factors, cluster sizes, MAP, PPM, PSRF and ESS");
  std::string diag_run;
  int prior_sims = 100000;
  std::uint64_t diag_seed = 1;
  diag->add_option("run", diag_run, "Run directory")->required();
  diag->add_option("--prior-sims", prior_sims, "Prior simulations for P(J+ = 1)")->capture_default_str();
  diag->add_option("--seed", diag_seed, "Seed of the prior simulation")->capture_default_str();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Posterior mean curves and pointwise credible bands");
  std::string rec_run;
  double level = 0.95;
  rec->add_option("run", rec_run, "Run directory")->required();
  rec->add_option("--level", level, "Credible level in (0, 1)")->capture_default_str();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "IMSE, correlation error, ARI and CII against the truth");
  std::string eval_run, eval_baseline = "std";
  std::optional<std::string> truth;
  eval->add_option("run", eval_run, "Run directory")->required();
  eval->add_option("--truth", truth, "Truth directory (default: <run>/data)");
  eval->add_option("--baseline", eval_baseline, "std, fpca, none or another run directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) {
      DgpSpec spec = sim_spec.empty() ? DgpSpec::preset(dgp_kind_from_string(dgp), stn, sim_seed, sim_n, sim_t)
                                      : dgp_spec_from_json(read_json(sim_spec));
      const fs::path out = output_root_path(sim_out);
      cmd_simulate(spec, replicates, out);
      std::cout << "wrote " << replicates << " dataset" << (replicates == 1 ? "" : "s") << " to " << out.string()
                << '\n';
    } else if (*fit) {
      RunConfig config = run_config_from_json(read_json(config_path), fs::path(config_path).parent_path());
      if (paper_scale) {
        const auto seed = config.mcmc.seed;
        config.mcmc = McmcConfig::paper_scale(seed);
      }
      if (fit_seed) config.mcmc.seed = *fit_seed;
      if (!fit_out.empty()) config.output = fit_out;
      for (const auto& b : baselines) {
        if (b == "std" || b == "standard_bfpca")
          config.baselines.push_back(Baseline::standard_bfpca);
        else if (b == "fpca" || b == "frequentist_fpca")
          config.baselines.push_back(Baseline::frequentist_fpca);
        else
          throw ValidationError("unknown baseline '" + b + "'");
      }
      apply_environment(config);
      if (fit_threads) config.threads = *fit_threads;
      const auto manifest = cmd_fit(config);
      std::cout << "run " << config.output.string() << "  K=" << manifest.at("K")
                << "  draws_hash=" << manifest.at("draws_hash").get<std::string>() << '\n';
    } else if (*diag) {
      std::cout << cmd_diagnose(diag_run, prior_sims, diag_seed);
    } else if (*rec) {
      cmd_reconstruct(rec_run, level);
      std::cout << "wrote reconstruction_{mean,lower,upper}.csv to " << rec_run << '\n';
    } else if (*eval) {
      std::optional<fs::path> truth_dir;
      if (truth) truth_dir = *truth;
      const MetricReport report = cmd_evaluate(eval_run, truth_dir, eval_baseline);
      std::cout << "mean IMSE " << format_double(report.imse.mean()) << ", correlation L2 "
                << format_double(report.correlation.l2) << '\n';
      if (report.improvement)
        std::cout << "IMSE improvement vs " << eval_baseline << ": median " << report.improvement->median
                  << "%, IQR " << report.improvement->iqr() << "%, improved on "
                  << 100.0 * report.improvement->fraction_improved << "% of curves\n";
      for (const auto& d : report.dimensions) {
        std::cout << "dim " << d.dimension + 1 << ": ARI ";
        if (d.ari) std::cout << *d.ari; else std::cout << "n/a";
        std::cout << ", CII ";
        if (d.cii) std::cout << *d.cii; else std::cout << "undefined";
        std::cout << '\n';
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
