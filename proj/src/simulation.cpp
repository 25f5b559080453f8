#include "fpclust/simulation.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "fpclust/draws_io.hpp"
#include "fpclust/error.hpp"
#include "fpclust/random.hpp"

namespace fpclust {

Matrix make_eigenfunctions(Eigen::Index time_points, int count) {
  if (count < 1 || count >= time_points)
    throw ValidationError("eigenfunction count must lie in [1, T)");
  const double width = 0.2;
  Matrix phi(count, time_points);
  for (int k = 0; k < count; ++k) {
    const double freq = k + 1.0;
    const double phase = 0.25 * std::numbers::pi * k;
    for (Eigen::Index t = 0; t < time_points; ++t) {
      const double u = static_cast<double>(t) / static_cast<double>(time_points - 1);
      const double window = std::exp(-(u - 0.5) * (u - 0.5) / (2.0 * width * width));
      phi(k, t) = window * std::sin(2.0 * std::numbers::pi * freq * u + phase);
    }
  }
  for (int k = 0; k < count; ++k) {
    const double original = phi.row(k).norm();
    for (int pass = 0; pass < 2; ++pass)
      for (int l = 0; l < k; ++l) phi.row(k) -= phi.row(k).dot(phi.row(l)) * phi.row(l);
    const double norm = phi.row(k).norm();
    if (!(norm > 1e-8 * original))
      throw NumericalError("eigenfunction template " + std::to_string(k + 1) +
                           " is linearly dependent on the earlier ones");
    phi.row(k) /= norm;
  }
  return phi;
}

double matern_half(double d, double rho, double sigma2) { return sigma2 * std::exp(-d / rho); }

DgpSpec DgpSpec::preset(DgpKind kind, double stn, std::uint64_t seed, Eigen::Index n, Eigen::Index time_points) {
  const MixtureScores two{{{-4.0, 1.0, 0.5}, {4.0, 1.0, 0.5}}};
  const MixtureScores three{{{-3.0, 0.25, 0.25}, {3.0, 0.25, 0.25}, {0.0, 0.25, 0.5}}};
  DgpSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.time_points = time_points;
  spec.stn = stn;
  spec.seed = seed;
  switch (kind) {
    case DgpKind::dgp1: spec.dims = {two, three}; break;
    case DgpKind::dgp2: spec.dims = {MaternScores{0.9, 10.0}, three}; break;
    case DgpKind::dgp3: spec.dims = {MaternScores{0.9, 10.0}, MaternScores{0.7, 5.0}}; break;
  }
  return spec;
}

void DgpSpec::validate() const {
  if (n < 2) throw ValidationError("n must be at least 2");
  if (time_points < 4) throw ValidationError("T must be at least 4");
  if (!(stn > 0.0) || !std::isfinite(stn)) throw ValidationError("stn must be positive");
  if (dims.empty()) throw ValidationError("at least one score dimension is required");
  if (static_cast<Eigen::Index>(dims.size()) >= time_points)
    throw ValidationError("more score dimensions than time points");
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const std::string where = "dimension " + std::to_string(k + 1) + ": ";
    if (const auto* m = std::get_if<MixtureScores>(&dims[k])) {
      if (m->components.empty()) throw ValidationError(where + "mixture has no components");
      double total = 0.0;
      for (const auto& c : m->components) {
        if (!(c.sd > 0.0) || !(c.share > 0.0) || !std::isfinite(c.mean))
          throw ValidationError(where + "mixture components need finite means and positive sd and share");
        total += c.share;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ValidationError(where + "mixture shares must sum to 1");
    } else {
      const auto& mt = std::get<MaternScores>(dims[k]);
      if (!(mt.rho > 0.0) || !(mt.sigma2 > 0.0) || !(mt.span > 0.0))
        throw ValidationError(where + "Matern rho, sigma2 and span must be positive");
    }
  }
}

std::vector<Eigen::Index> block_sizes(const std::vector<MixtureComponent>& components, Eigen::Index n) {
  std::vector<Eigen::Index> sizes;
  Eigen::Index used = 0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    Eigen::Index size = j + 1 == components.size()
                            ? n - used
                            : static_cast<Eigen::Index>(std::floor(components[j].share * static_cast<double>(n)));
    size = std::max<Eigen::Index>(0, std::min(size, n - used));
    sizes.push_back(size);
    used += size;
  }
  return sizes;
}

Matrix matern_covariance(const MaternScores& params, Eigen::Index n) {
  Matrix cov(n, n);
  const double step = params.span / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cov(i, j) = matern_half(std::abs(static_cast<double>(i - j)) * step, params.rho, params.sigma2);
  return cov;
}

SimulatedDataset generate(const DgpSpec& spec) {
  spec.validate();
  Rng rng = Rng::stream(spec.seed, spec.replicate);
  const Eigen::Index n = spec.n;
  const int K = static_cast<int>(spec.dims.size());
  Matrix phi = make_eigenfunctions(spec.time_points, K);
  Matrix scores(n, K);
  std::vector<std::optional<IntVector>> partitions(K);

  for (int k = 0; k < K; ++k) {
    if (const auto* m = std::get_if<MixtureScores>(&spec.dims[k])) {
      const auto sizes = block_sizes(m->components, n);
      IntVector labels(n);
      Eigen::Index i = 0;
      for (std::size_t j = 0; j < sizes.size(); ++j)
        for (Eigen::Index b = 0; b < sizes[j]; ++b, ++i) {
          labels(i) = static_cast<int>(j);
          scores(i, k) = rng.normal(m->components[j].mean, m->components[j].sd);
        }
      partitions[k] = labels;
    } else {
      const auto& mt = std::get<MaternScores>(spec.dims[k]);
      Matrix cov = matern_covariance(mt, n);
      cov.diagonal().array() += 1e-10 * mt.sigma2;
      Eigen::LLT<Matrix> llt(cov);
      if (llt.info() != Eigen::Success)
        throw NumericalError("Matern covariance of dimension " + std::to_string(k + 1) +
                             " is not positive definite");
      Vector z(n);
      for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
      scores.col(k) = llt.matrixL() * z;
    }
  }

  Matrix truth = scores * phi;
  const double mean = truth.mean();
  const double var = (truth.array() - mean).square().sum() / static_cast<double>(truth.size() - 1);
  const double noise_sd = std::sqrt(var / spec.stn);
  Matrix observed = truth;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < spec.time_points; ++t) observed(i, t) += noise_sd * rng.normal();

  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < n; ++i) labels.push_back("curve_" + std::to_string(i + 1));
  return SimulatedDataset{
      FunctionalDataset(std::move(observed), TimeGrid::unit_spaced(spec.time_points), std::move(labels)),
      std::move(truth), std::move(partitions), std::move(scores), std::move(phi), noise_sd};
}

void save_simulated(const SimulatedDataset& data, const DgpSpec& spec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_dataset(data.observed, dir / "observed.csv");
  save_matrix_csv(data.truth, dir / "truth.csv");
  save_matrix_csv(data.scores, dir / "scores.csv");
  save_matrix_csv(data.eigenfunctions, dir / "eigenfunctions.csv");
  nlohmann::json parts = nlohmann::json::array();
  for (std::size_t k = 0; k < data.partitions.size(); ++k) {
    nlohmann::json p;
    p["dimension"] = k + 1;
    if (data.partitions[k]) {
      std::vector<int> l(data.partitions[k]->data(), data.partitions[k]->data() + data.partitions[k]->size());
      for (int& v : l) ++v;
      p["labels"] = l;
    } else {
      p["labels"] = nullptr;
    }
    parts.push_back(p);
  }
  write_json({{"label_base", 1}, {"dimensions", parts}, {"noise_sd", data.noise_sd}}, dir / "partitions.json");
  write_json(to_json(spec), dir / "spec.json");
}

TruthBundle load_truth(const std::filesystem::path& dir) {
  TruthBundle out;
  out.truth = load_matrix_csv(dir / "truth.csv");
  const auto parts = read_json(dir / "partitions.json");
  try {
    const int base = parts.value("label_base", 1);
    for (const auto& p : parts.at("dimensions")) {
      if (p.at("labels").is_null()) {
        out.partitions.emplace_back(std::nullopt);
        continue;
      }
      const auto l = p.at("labels").get<std::vector<int>>();
      IntVector v(static_cast<Eigen::Index>(l.size()));
      for (std::size_t i = 0; i < l.size(); ++i) v(static_cast<Eigen::Index>(i)) = l[i] - base;
      out.partitions.emplace_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed partitions.json: " + std::string(e.what()));
  }
  return out;
}

std::string to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::dgp1: return "dgp1";
    case DgpKind::dgp2: return "dgp2";
    case DgpKind::dgp3: return "dgp3";
  }
  return "unknown";
}

DgpKind dgp_kind_from_string(const std::string& s) {
  if (s == "dgp1" || s == "1") return DgpKind::dgp1;
  if (s == "dgp2" || s == "2") return DgpKind::dgp2;
  if (s == "dgp3" || s == "3") return DgpKind::dgp3;
  throw ValidationError("unknown data-generating process '" + s + "'");
}

nlohmann::json to_json(const DgpSpec& spec) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& g : spec.dims) {
    if (const auto* m = std::get_if<MixtureScores>(&g)) {
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& c : m->components) comps.push_back({{"mean", c.mean}, {"sd", c.sd}, {"share", c.share}});
      dims.push_back({{"type", "mixture"}, {"components", comps}});
    } else {
      const auto& mt = std::get<MaternScores>(g);
      dims.push_back({{"type", "matern"}, {"rho", mt.rho}, {"sigma2", mt.sigma2}, {"span", mt.span}});
    }
  }
  return {{"kind", to_string(spec.kind)}, {"n", spec.n},           {"T", spec.time_points}, {"stn", spec.stn},
          {"seed", spec.seed},            {"replicate", spec.replicate}, {"dims", dims}};
}

DgpSpec dgp_spec_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ValidationError("simulation spec must be a JSON object");
    static const char* known[] = {"kind", "n", "T", "stn", "seed", "replicate", "dims"};
    for (const auto& [key, value] : j.items())
      if (std::find(std::begin(known), std::end(known), key) == std::end(known))
        throw ValidationError("unknown simulation field '" + key + "'");
    const DgpKind kind = dgp_kind_from_string(j.value("kind", std::string("dgp1")));
    DgpSpec spec = DgpSpec::preset(kind, j.value("stn", 6.0), j.value("seed", std::uint64_t{1}),
                                   j.value("n", Eigen::Index{100}), j.value("T", Eigen::Index{150}));
    spec.replicate = j.value("replicate", std::uint64_t{0});
    if (j.contains("dims")) {
      spec.dims.clear();
      for (const auto& d : j.at("dims")) {
        const std::string type = d.at("type").get<std::string>();
        if (type == "mixture") {
          MixtureScores m;
          for (const auto& c : d.at("components"))
            m.components.push_back({c.at("mean").get<double>(), c.at("sd").get<double>(), c.at("share").get<double>()});
          spec.dims.emplace_back(m);
        } else if (type == "matern") {
          spec.dims.emplace_back(
              MaternScores{d.at("rho").get<double>(), d.at("sigma2").get<double>(), d.value("span", 1.0)});
        } else {
          throw ValidationError("unknown score generator type '" + type + "'");
        }
      }
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed simulation spec: " + std::string(e.what()));
  }
}

}  // namespace fpclust
