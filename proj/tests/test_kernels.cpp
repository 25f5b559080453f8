#include <algorithm>
#include <random>

#include "doctest.h"
#include "fpclust/kernels.hpp"
#include "support.hpp"

using namespace fpclust;
using kernels::Backend;

TEST_SUITE("kernels") {
  TEST_CASE("projection and residuals agree across backends and with direct loops") {
    const Matrix y = testing::random_matrix(17, 23, 1);
    const Matrix phi = testing::random_matrix(3, 23, 2);
    const Matrix xi = testing::random_matrix(17, 3, 3);
    const Matrix a = kernels::project(Backend::serial, y, phi);
    const Matrix b = kernels::project(Backend::openmp, y, phi);
    CHECK(a == b);
    CHECK((a - y * phi.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    const double ra = kernels::residual_sum_of_squares(Backend::serial, y, xi, phi);
    const double rb = kernels::residual_sum_of_squares(Backend::openmp, y, xi, phi);
    CHECK(ra == rb);
    double direct = 0.0;
    for (int i = 0; i < 17; ++i)
      for (int t = 0; t < 23; ++t) {
        double fit = 0.0;
        for (int k = 0; k < 3; ++k) fit += xi(i, k) * phi(k, t);
        direct += (y(i, t) - fit) * (y(i, t) - fit);
      }
    CHECK(ra == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("allocation log weights") {
    Vector x(3), p(3), mu(3), s(3);
    x << 0.0, 1.0, -2.0;
    p << 0.5, 0.5, 0.0;
    mu << -1.0, 1.0, 0.0;
    s << 1.0, 4.0, 2.0;
    Matrix a, b;
    kernels::allocation_log_weights(Backend::serial, x, p, mu, s, a);
    kernels::allocation_log_weights(Backend::openmp, x, p, mu, s, b);
    CHECK(a == b);
    CHECK(a(1, 1) == doctest::Approx(std::log(0.5) + 0.5 * std::log(4.0)));
    CHECK(a(2, 0) == doctest::Approx(std::log(0.5) - 0.5));
    CHECK(std::isinf(a(0, 2)));
    CHECK(a(0, 2) < 0.0);
  }

  TEST_CASE("co-clustering counts shared labels") {
    std::vector<IntVector> labels{(IntVector(4) << 0, 0, 1, 1).finished(), (IntVector(4) << 2, 0, 2, 2).finished()};
    const Matrix a = kernels::coclustering(Backend::serial, labels);
    const Matrix b = kernels::coclustering(Backend::openmp, labels);
    CHECK(a == b);
    CHECK(a(0, 1) == 0.5);
    CHECK(a(2, 3) == 1.0);
    CHECK(a(0, 2) == 0.5);
    CHECK(a(1, 3) == 0.0);
    CHECK(a.diagonal() == Vector::Ones(4));
  }

  TEST_CASE("sorted quantile interpolates order statistics") {
    const std::vector<double> v{1.0, 2.0, 4.0, 8.0};
    CHECK(kernels::sorted_quantile(v.data(), 4, 0.0) == 1.0);
    CHECK(kernels::sorted_quantile(v.data(), 4, 1.0) == 8.0);
    CHECK(kernels::sorted_quantile(v.data(), 4, 0.5) == doctest::Approx(3.0));
    CHECK(kernels::sorted_quantile(v.data(), 4, 0.25) == doctest::Approx(1.75));
  }

  TEST_CASE("bands match a brute-force sort and agree across backends") {
    const int n = 6, t_count = 11, k_count = 2, snapshots = 57;
    std::vector<Matrix> xi;
    for (int w = 0; w < snapshots; ++w) xi.push_back(testing::random_matrix(n, k_count, 100 + w));
    std::vector<const Matrix*> ptrs;
    for (const auto& m : xi) ptrs.push_back(&m);
    const Matrix phi = testing::random_matrix(k_count, t_count, 7);
    const Vector mean = testing::random_matrix(t_count, 1, 8);
    const auto a = kernels::pointwise_bands(Backend::serial, ptrs, phi, mean, 0.025, 0.975);
    const auto b = kernels::pointwise_bands(Backend::openmp, ptrs, phi, mean, 0.025, 0.975);
    CHECK(a.mean == b.mean);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);

    std::mt19937 gen(5);
    for (int probe = 0; probe < 5; ++probe) {
      const int i = std::uniform_int_distribution<int>(0, n - 1)(gen);
      const int t = std::uniform_int_distribution<int>(0, t_count - 1)(gen);
      std::vector<double> values;
      for (const auto& m : xi) values.push_back(mean(t) + m(i, 0) * phi(0, t) + m(i, 1) * phi(1, t));
      std::sort(values.begin(), values.end());
      // type-7 quantile: h = (N - 1) p
      auto q = [&](double p) {
        const double h = (snapshots - 1) * p;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (h - lo) * (values[hi] - values[lo]);
      };
      double sum = 0.0;
      for (double v : values) sum += v;
      CHECK(a.lower(i, t) == doctest::Approx(q(0.025)).epsilon(1e-12));
      CHECK(a.upper(i, t) == doctest::Approx(q(0.975)).epsilon(1e-12));
      CHECK(a.mean(i, t) == doctest::Approx(sum / snapshots).epsilon(1e-12));
    }
  }

  TEST_CASE("thread count control") {
    const int before = kernels::max_threads();
    kernels::set_threads(1);
    CHECK(kernels::max_threads() == 1);
    kernels::set_threads(before);
    CHECK(kernels::max_threads() == before);
  }
}
