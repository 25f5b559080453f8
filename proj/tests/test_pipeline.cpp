#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fpclust/draws_io.hpp"
#include "fpclust/error.hpp"
#include "fpclust/pipeline.hpp"
#include "support.hpp"

using namespace fpclust;
using nlohmann::json;

namespace {

json small_config(const std::filesystem::path& out, std::uint64_t seed = 5) {
  return {{"simulation", {{"kind", "dgp1"}, {"n", 24}, {"T", 30}, {"stn", 6}, {"seed", 3}}},
          {"retain", {{"rule", "fixed"}, {"k", 2}}},
          {"mcmc", {{"burn_in", 100}, {"iterations", 200}, {"thinning", 2}, {"chains", 2}, {"seed", seed}}},
          {"baselines", {"std"}},
          {"output", out.string()}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("run config parsing") {
    testing::TempDir dir("config");
    const auto c = run_config_from_json(small_config(dir / "run"));
    CHECK(c.simulation.has_value());
    CHECK_FALSE(c.input.has_value());
    CHECK(c.mcmc.iterations == 200);
    CHECK(c.likelihood == LikelihoodData::observed);
    REQUIRE(c.baselines.size() == 1);
    CHECK(c.baselines[0] == Baseline::standard_bfpca);

    json desk = small_config(dir / "run");
    desk["mcmc"] = "desk";
    const auto d = run_config_from_json(desk);
    CHECK(d.mcmc.burn_in == 5000);
    CHECK(d.mcmc.iterations == 10000);
    CHECK(d.mcmc.thinning == 5);
    CHECK(d.mcmc.chains == 2);
    desk["mcmc"] = "paper";
    CHECK(run_config_from_json(desk).mcmc.burn_in == 100000);

    const auto back = run_config_from_json(to_json(c));
    CHECK(back.mcmc.seed == c.mcmc.seed);
    CHECK(to_json(back) == to_json(c));
  }

  TEST_CASE("run config validation") {
    testing::TempDir dir("config_bad");
    json unknown = small_config(dir / "run");
    unknown["iterations"] = 10;
    CHECK_THROWS_AS(run_config_from_json(unknown), ValidationError);

    json both = small_config(dir / "run");
    std::ofstream(dir / "x.csv") << "1,2,3,4\n5,6,7,8\n";
    both["input"] = "x.csv";
    CHECK_THROWS_AS(run_config_from_json(both, dir.path()), ValidationError);
    both.erase("simulation");
    CHECK(run_config_from_json(both, dir.path()).input->filename() == "x.csv");
    both["input"] = "missing.csv";
    CHECK_THROWS_AS(run_config_from_json(both, dir.path()), ValidationError);

    json neither = small_config(dir / "run");
    neither.erase("simulation");
    CHECK_THROWS_AS(run_config_from_json(neither), ValidationError);

    json bad_mcmc = small_config(dir / "run");
    bad_mcmc["mcmc"]["thinning"] = 7;
    CHECK_THROWS_AS(run_config_from_json(bad_mcmc), ValidationError);
    bad_mcmc["mcmc"] = "huge";
    CHECK_THROWS_AS(run_config_from_json(bad_mcmc), ValidationError);

    json bad_model = small_config(dir / "run");
    bad_model["model"] = {{"J", 20}};
    CHECK_THROWS_AS(run_config_from_json(bad_model), ValidationError);

    json bad_stn = small_config(dir / "run");
    bad_stn["simulation"]["stn"] = 0;
    CHECK_THROWS_AS(run_config_from_json(bad_stn), ValidationError);

    json bad_type = small_config(dir / "run");
    bad_type["threads"] = "many";
    CHECK_THROWS_AS(run_config_from_json(bad_type), ValidationError);
  }

  TEST_CASE("environment overrides") {
    testing::TempDir dir("env");
    auto c = run_config_from_json(small_config("relative_run"));
    setenv("FPCLUST_OUTPUT_ROOT", dir.path().c_str(), 1);
    setenv("FPCLUST_THREADS", "3", 1);
    apply_environment(c);
    unsetenv("FPCLUST_OUTPUT_ROOT");
    unsetenv("FPCLUST_THREADS");
    CHECK(c.output == dir / "relative_run");
    CHECK(c.threads == 3);
  }

  TEST_CASE("model overrides merge per dimension") {
    const auto sim = generate(DgpSpec::preset(DgpKind::dgp1, 6.0, 3, 24, 30));
    const auto data = prepare(sim.observed, {}, RetainFixed{2});
    const auto m = resolve_model(data.basis, {{"truncation", 30}, {"dims", {{{"q", 3.0}}, json::object()}}});
    CHECK(m.truncation == 30);
    CHECK(m.dims[0].q == 3.0);
    CHECK(m.dims[0].r == doctest::Approx(1.0 / data.basis.eigenvalues(0)));
    CHECK(m.dims[1].q == 5.0);
    const auto s = resolve_model(data.basis, json::object(), Mode::standard_bfpca);
    CHECK(s.mode == Mode::standard_bfpca);
    CHECK_THROWS_AS(resolve_model(data.basis, {{"dims", {json::object(), json::object(), json::object()}}}),
                    ValidationError);
  }

  TEST_CASE("prepared likelihood data") {
    const auto sim = generate(DgpSpec::preset(DgpKind::dgp1, 1.0, 3, 24, 30));
    const auto obs = prepare(sim.observed, {}, RetainFixed{2}, LikelihoodData::observed);
    const auto smo = prepare(sim.observed, {}, RetainFixed{2}, LikelihoodData::smoothed);
    CHECK(smo.sampler_input.values == smo.centered.values);
    const Matrix expected = sim.observed.values().rowwise() - obs.centered.mean_curve.transpose();
    CHECK((obs.sampler_input.values - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(obs.basis.eigenfunctions == smo.basis.eigenfunctions);
    // the smoothed centred data are centred and reproduce the smoothed curves
    const Matrix back = obs.centered.values.rowwise() + obs.centered.mean_curve.transpose();
    CHECK((back - obs.smoothed.values()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("fit, diagnose, reconstruct and evaluate") {
    testing::TempDir dir("pipeline");
    const auto config = run_config_from_json(small_config(dir / "run"));
    const auto manifest = cmd_fit(config);
    CHECK(manifest["schema"] == "fpclust.run");
    CHECK(manifest["model"]["truncation"] == 20);
    CHECK(manifest["model"]["dims"][0]["q"] == 10.0);
    CHECK(manifest["model"]["dims"][1]["q"] == 5.0);
    CHECK(manifest["config_hash"].get<std::string>().size() == 40);
    for (const char* f : {"config.json", "basis.json", "smoothed.csv", "manifest.json", "draws/manifest.json",
                          "standard_bfpca/draws/manifest.json", "data/truth.csv"})
      CHECK(std::filesystem::exists(dir / "run" / f));

    const std::string report = cmd_diagnose(dir / "run", 10000, 1);
    CHECK(report.find("BF(single)") != std::string::npos);
    CHECK(report.find("PSRF") != std::string::npos);
    const auto diag = read_json(dir / "run" / "diagnostics.json");
    CHECK(diag.contains("convergence"));
    const Matrix ppm = load_matrix_csv(dir / "run" / "ppm_k1.csv");
    CHECK(ppm.rows() == 24);
    CHECK(ppm.isApprox(ppm.transpose()));
    CHECK(ppm.diagonal() == Vector::Ones(24));

    cmd_reconstruct(dir / "run", 0.9);
    const Matrix lo = load_matrix_csv(dir / "run" / "reconstruction_lower.csv");
    const Matrix hi = load_matrix_csv(dir / "run" / "reconstruction_upper.csv");
    CHECK((lo.array() <= hi.array()).all());
    CHECK_THROWS_AS(cmd_reconstruct(dir / "run", 1.5), ValidationError);

    const auto metrics = cmd_evaluate(dir / "run", std::nullopt, "std");
    REQUIRE(metrics.improvement.has_value());
    CHECK(metrics.imse.size() == 24);
    REQUIRE(metrics.dimensions.size() == 2);
    REQUIRE(metrics.dimensions[0].ari.has_value());
    CHECK(*metrics.dimensions[0].ari <= 1.0);
    CHECK(std::filesystem::exists(dir / "run" / "metrics.csv"));
    const auto fpca = cmd_evaluate(dir / "run", std::nullopt, "fpca");
    CHECK(fpca.baseline_imse.has_value());
    CHECK_THROWS(cmd_evaluate(dir / "run", dir / "nowhere", "none"));
  }

  TEST_CASE("same config and seed give identical manifests") {
    testing::TempDir dir("determinism");
    cmd_fit(run_config_from_json(small_config(dir / "a")));
    cmd_fit(run_config_from_json(small_config(dir / "b")));
    CHECK(slurp(dir / "a" / "draws" / "manifest.json") == slurp(dir / "b" / "draws" / "manifest.json"));
    const auto ma = read_json(dir / "a" / "manifest.json");
    const auto mb = read_json(dir / "b" / "manifest.json");
    CHECK(ma["draws_hash"] == mb["draws_hash"]);
  }

  TEST_CASE("simulate writes replicate directories") {
    testing::TempDir dir("simulate");
    cmd_simulate(DgpSpec::preset(DgpKind::dgp3, 1.0, 2, 10, 20), 3, dir.path());
    for (const char* r : {"rep_001", "rep_002", "rep_003"}) CHECK(std::filesystem::exists(dir / r / "observed.csv"));
    const Matrix a = load_matrix_csv(dir / "rep_001" / "truth.csv");
    const Matrix b = load_matrix_csv(dir / "rep_002" / "truth.csv");
    CHECK(a != b);
  }

  TEST_CASE("EEG-shaped CSV input runs end to end") {
    // 128 channels x 256 samples: smooth sinusoids plus noise, no truth.
    testing::TempDir dir("eeg");
    const Matrix noise = testing::random_matrix(128, 256, 11);
    {
      std::ofstream out(dir / "eeg.csv");
      for (Eigen::Index i = 0; i < 128; ++i)
        for (Eigen::Index t = 0; t < 256; ++t)
          out << std::sin(0.05 * static_cast<double>(t) + 0.1 * static_cast<double>(i)) * (1 + i % 3) +
                     0.2 * noise(i, t)
              << (t + 1 < 256 ? "," : "\n");
    }
    json config = {{"input", (dir / "eeg.csv").string()},
                   {"mcmc", {{"burn_in", 50}, {"iterations", 100}, {"thinning", 2}, {"chains", 1}, {"seed", 1}}},
                   {"output", (dir / "run").string()}};
    const auto manifest = cmd_fit(run_config_from_json(config));
    CHECK(manifest.contains("draws_hash"));
    const auto draws = load_draws(dir / "run" / "draws");
    CHECK(draws.n == 128);
    CHECK(draws.time_points == 256);
    CHECK(cmd_diagnose(dir / "run", 10000).find("PSRF") != std::string::npos);
    cmd_reconstruct(dir / "run");
    CHECK(load_matrix_csv(dir / "run" / "reconstruction_mean.csv").rows() == 128);
    CHECK_THROWS_AS(cmd_evaluate(dir / "run", std::nullopt), IoError);
  }
}
