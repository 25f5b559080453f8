#include "fpclust/fpca.hpp"

#include <cmath>
#include <sstream>

#include "fpclust/error.hpp"

namespace fpclust {

namespace {

constexpr double kShareSlack = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string describe(const RetainRule& rule) {
  std::ostringstream out;
  std::visit(overloaded{
                 [&](const RetainThreshold& r) { out << "threshold(" << r.fraction << ")"; },
                 [&](const RetainFixed& r) { out << "fixed(" << r.k << ")"; },
                 [&](const RetainThresholdMinShare& r) {
                   out << "threshold_and_min_share(" << r.fraction << ", " << r.min_share << ")";
                 },
             },
             rule);
  return out.str();
}

nlohmann::json to_json(const RetainRule& rule) {
  return std::visit(
      overloaded{
          [](const RetainThreshold& r) {
            return nlohmann::json{{"rule", "threshold"}, {"fraction", r.fraction}};
          },
          [](const RetainFixed& r) { return nlohmann::json{{"rule", "fixed"}, {"k", r.k}}; },
          [](const RetainThresholdMinShare& r) {
            return nlohmann::json{
                {"rule", "threshold_and_min_share"}, {"fraction", r.fraction}, {"min_share", r.min_share}};
          },
      },
      rule);
}

RetainRule retain_rule_from_json(const nlohmann::json& j) {
  const std::string name = j.at("rule").get<std::string>();
  if (name == "threshold") return RetainThreshold{j.at("fraction").get<double>()};
  if (name == "fixed") return RetainFixed{j.at("k").get<int>()};
  if (name == "threshold_and_min_share")
    return RetainThresholdMinShare{j.at("fraction").get<double>(), j.at("min_share").get<double>()};
  throw ValidationError("unknown retain rule '" + name + "'");
}

int select_components(const Vector& spectrum, const RetainRule& rule) {
  const double total = spectrum.sum();
  if (!(total > 0.0)) throw DimensionError("covariance has zero total variance");
  const int full = static_cast<int>(spectrum.size());

  auto threshold_k = [&](double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw ValidationError("retain fraction must lie in (0, 1]");
    double cumulative = 0.0;
    for (int k = 0; k < full; ++k) {
      cumulative += spectrum(k);
      if (cumulative / total >= fraction - kShareSlack) return k + 1;
    }
    return full;
  };

  return std::visit(overloaded{
                        [&](const RetainThreshold& r) { return threshold_k(r.fraction); },
                        [&](const RetainFixed& r) {
                          if (r.k < 1) throw ValidationError("fixed K must be positive");
                          return r.k;
                        },
                        [&](const RetainThresholdMinShare& r) {
                          int k = threshold_k(r.fraction);
                          int by_share = 0;
                          while (by_share < full && spectrum(by_share) / total >= r.min_share - kShareSlack)
                            ++by_share;
                          return std::max(1, std::min(k, by_share));
                        },
                    },
                    rule);
}

FpcaBasis decompose(const CenteredDataset& centered, const RetainRule& rule) {
  const Matrix& y = centered.values;
  const Eigen::Index n = y.rows();
  const Eigen::Index t = y.cols();
  if (n < 2) throw DimensionError("decompose needs at least 2 curves");
  if (centered.mean_curve.size() != t) throw DimensionError("mean curve length mismatch");

  const Matrix cov = (y.transpose() * y) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");

  // Eigen returns ascending order.
  Vector spectrum = solver.eigenvalues().reverse();
  Matrix vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) spectrum(k) = std::max(spectrum(k), 0.0);

  const double total = cov.trace();
  const int k = select_components(spectrum, rule);
  const double tol = std::max(spectrum(0), 1.0) * 1e-12 * static_cast<double>(t);
  int rank = 0;
  while (rank < spectrum.size() && spectrum(rank) > tol) ++rank;
  if (k > rank)
    throw DimensionError("covariance rank " + std::to_string(rank) + " is below the requested K=" +
                         std::to_string(k));

  FpcaBasis basis;
  basis.mean_curve = centered.mean_curve;
  basis.eigenvalues = spectrum.head(k);
  basis.eigenfunctions.resize(k, t);
  for (int c = 0; c < k; ++c) {
    Vector v = vectors.col(c).normalized();
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    basis.eigenfunctions.row(c) = v.transpose();
  }
  basis.scores = y * basis.eigenfunctions.transpose();
  basis.total_variance = total;
  basis.retain_rule = describe(rule);
  return basis;
}

Matrix reconstruct_from_scores(const FpcaBasis& basis, const Matrix& scores) {
  if (scores.cols() != basis.eigenfunctions.rows())
    throw DimensionError("score matrix has " + std::to_string(scores.cols()) +
                         " columns but the basis has K=" + std::to_string(basis.eigenfunctions.rows()));
  Matrix out = scores * basis.eigenfunctions;
  out.rowwise() += basis.mean_curve.transpose();
  return out;
}

nlohmann::json to_json(const FpcaBasis& basis) {
  nlohmann::json phi = nlohmann::json::array();
  for (Eigen::Index k = 0; k < basis.eigenfunctions.rows(); ++k)
    phi.push_back(to_vector(basis.eigenfunctions.row(k).transpose()));
  nlohmann::json scores = nlohmann::json::array();
  for (Eigen::Index i = 0; i < basis.scores.rows(); ++i)
    scores.push_back(to_vector(basis.scores.row(i).transpose()));
  return {
      {"K", basis.k()},
      {"mean", to_vector(basis.mean_curve)},
      {"eigenvalues", to_vector(basis.eigenvalues)},
      {"eigenfunctions", std::move(phi)},
      {"scores", std::move(scores)},
      {"total_variance", basis.total_variance},
      {"provenance", {{"basis_size", basis.basis_size}, {"retain_rule", basis.retain_rule}}},
  };
}

FpcaBasis basis_from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    auto v = a.get<std::vector<double>>();
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  auto mat = [&](const nlohmann::json& a, Eigen::Index cols) {
    Matrix m(static_cast<Eigen::Index>(a.size()), cols);
    for (std::size_t r = 0; r < a.size(); ++r) {
      Vector row = vec(a[r]);
      if (row.size() != cols) throw FormatError("ragged matrix in basis JSON");
      m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
  };
  FpcaBasis b;
  b.mean_curve = vec(j.at("mean"));
  b.eigenvalues = vec(j.at("eigenvalues"));
  const auto k = b.eigenvalues.size();
  b.eigenfunctions = mat(j.at("eigenfunctions"), b.mean_curve.size());
  b.scores = mat(j.at("scores"), k);
  b.total_variance = j.at("total_variance").get<double>();
  if (j.contains("provenance")) {
    b.basis_size = j["provenance"].value("basis_size", 0);
    b.retain_rule = j["provenance"].value("retain_rule", "");
  }
  if (j.at("K").get<int>() != k || b.eigenfunctions.rows() != k)
    throw FormatError("basis JSON has inconsistent K");
  return b;
}

}  // namespace fpclust
