#include <fstream>
#include <random>

#include "doctest.h"
#include "fpclust/error.hpp"
#include "fpclust/metrics.hpp"
#include "support.hpp"

using namespace fpclust;

namespace {

IntVector iv(std::initializer_list<int> v) {
  IntVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

double pearson(const Vector& a, const Vector& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    sa += a(t);
    sb += b(t);
    saa += a(t) * a(t);
    sbb += b(t) * b(t);
    sab += a(t) * b(t);
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("IMSE anchors") {
    const Matrix truth = testing::random_matrix(4, 9, 1);
    CHECK(imse(truth, truth).isZero(0.0));
    const Vector offset = imse(truth.array() + 0.3, truth);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(offset(i) == doctest::Approx(0.09).epsilon(1e-12));

    const Matrix est = testing::random_matrix(4, 9, 2);
    const Vector got = imse(est, truth);
    for (int i = 0; i < 4; ++i) {
      double sum = 0.0;
      for (int t = 0; t < 9; ++t) sum += (est(i, t) - truth(i, t)) * (est(i, t) - truth(i, t));
      CHECK(std::abs(got(i) - sum / 9.0) < 1e-12);
    }
    CHECK_THROWS_AS(imse(est, Matrix::Zero(4, 8)), DimensionError);
  }

  TEST_CASE("correlation error") {
    const Matrix truth = testing::random_matrix(3, 12, 3);
    CHECK(correlation_error(truth, truth).l2 == 0.0);
    Matrix scaled = truth;
    scaled.row(0) *= 2.5;
    scaled.row(1) *= 0.1;
    scaled.row(2) = scaled.row(2).array() * 7.0 + 4.0;
    CHECK(correlation_error(scaled, truth).l2 < 1e-12);

    const Matrix est = testing::random_matrix(3, 12, 4);
    double sq = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double d = pearson(est.row(i).transpose(), est.row(j).transpose()) -
                         pearson(truth.row(i).transpose(), truth.row(j).transpose());
        sq += d * d;
      }
    const auto e = correlation_error(est, truth);
    CHECK(std::abs(e.l2 - std::sqrt(sq)) < 1e-12);
    CHECK(e.pairs == 3);
    CHECK(e.rms == doctest::Approx(std::sqrt(sq / 3.0)));

    Matrix flat = est;
    flat.row(1).setConstant(2.0);
    try {
      correlation_error(flat, truth);
      FAIL("expected an error for a constant row");
    } catch (const DimensionError& err) {
      CHECK(std::string(err.what()).find("2") != std::string::npos);
    }
  }

  TEST_CASE("adjusted Rand index") {
    const IntVector a = iv({1, 1, 1, 2, 2, 2});
    const IntVector b = iv({1, 1, 2, 2, 3, 3});
    CHECK(std::abs(ari(a, b) - 8.0 / 33.0) < 1e-12);
    CHECK(std::abs(ari(a, b) - 0.2424) < 1e-4);
    CHECK(ari(a, a) == 1.0);
    CHECK(ari(b, a) == ari(a, b));
    CHECK(ari(iv({7, 7, 7, 0, 0, 0}), iv({5, 5, 9, 9, 1, 1})) == ari(a, b));
    CHECK(ari(iv({0, 0, 0}), iv({4, 4, 4})) == 1.0);
    CHECK(ari(a, iv({1, 2, 1, 2, 1, 2})) <= 0.0);
    CHECK_THROWS_AS(ari(a, iv({1, 2})), DimensionError);
  }

  TEST_CASE("CII anchors and lower bound") {
    const Matrix g = adjacency(iv({0, 0, 1, 1, 1}));
    const Matrix ones = Matrix::Ones(5, 5);
    CHECK(*cii(g, ones, g) == doctest::Approx(1.0));
    CHECK(*cii(ones, ones, g) == doctest::Approx(0.0));
    Matrix comp = Matrix::Ones(5, 5) - g;
    comp.diagonal().setOnes();
    const double direct = ((ones - g).norm() - (comp - g).norm()) / (ones - g).norm();
    CHECK(*cii(comp, ones, g) == doctest::Approx(direct));
    CHECK(*cii_lower_bound(ones, g) == doctest::Approx(direct));
    CHECK_FALSE(cii(g, g, g).has_value());

    // label-free: permuting the items of every matrix together changes nothing
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.indices() << 3, 0, 4, 1, 2;
    Matrix mid = 0.5 * (g + ones);
    const double before = *cii(mid, ones, g);
    const double after = *cii(perm * mid * perm.transpose(), ones, perm * g * perm.transpose());
    CHECK(after == doctest::Approx(before));
  }

  TEST_CASE("improvement report") {
    Vector base(4), half(4);
    base << 2.0, 4.0, 1.0, 8.0;
    half = base / 2.0;
    const auto a = improvement_report(half, base);
    CHECK(a.percent == Vector::Constant(4, 50.0));
    CHECK(a.fraction_improved == 1.0);
    CHECK(a.median == 50.0);
    const auto b = improvement_report(base, base);
    CHECK(b.percent.isZero());
    CHECK(b.fraction_improved == 0.0);

    Vector mixed(4);
    mixed << 1.0, 5.0, 0.25, 8.0;
    const auto c = improvement_report(mixed, base);
    CHECK(c.percent(0) == doctest::Approx(50.0));
    CHECK(c.percent(1) == doctest::Approx(-25.0));
    CHECK(c.percent(2) == doctest::Approx(75.0));
    CHECK(c.percent(3) == doctest::Approx(0.0));
    CHECK(c.median == doctest::Approx(25.0));
    CHECK(c.fraction_improved == doctest::Approx(0.5));
    // sorted (-25, 0, 50, 75), linear interpolation at 0.25 and 0.75
    CHECK(c.q25 == doctest::Approx(-6.25));
    CHECK(c.q75 == doctest::Approx(56.25));
    CHECK(c.iqr() == doctest::Approx(62.5));

    Vector zero = base;
    zero(2) = 0.0;
    CHECK_THROWS_AS(improvement_report(mixed, zero), ValidationError);
  }

  TEST_CASE("report serialisation") {
    MetricReport r;
    r.baseline = "std";
    r.imse = (Vector(2) << 0.1, 0.2).finished();
    r.baseline_imse = (Vector(2) << 0.2, 0.25).finished();
    r.improvement = improvement_report(r.imse, *r.baseline_imse);
    r.dimensions.push_back({0, 1.0, 0.5});
    r.dimensions.push_back({1, std::nullopt, std::nullopt});
    const auto j = to_json(r);
    CHECK(j["baseline"] == "std");
    CHECK(j.contains("imse_improvement"));
    testing::TempDir dir("metrics");
    save_metric_csv(r, dir / "m.csv");
    std::ifstream in(dir / "m.csv");
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "curve,imse,baseline_imse,improvement_percent");
    std::getline(in, row);
    CHECK(row.rfind("1,0.1", 0) == 0);
  }
}
