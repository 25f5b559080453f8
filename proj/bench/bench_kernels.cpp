// Serial reference vs OpenMP for each kernel. Run with
// --benchmark_filter=<kernel> to compare one pair.

#include <benchmark/benchmark.h>

#include <random>

#include "fpclust/kernels.hpp"

using namespace fpclust;
using kernels::Backend;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  return Matrix::NullaryExpr(rows, cols, [&]() { return z(gen); });
}

std::vector<IntVector> random_labels(int draws, Eigen::Index n, int clusters, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> u(0, clusters - 1);
  std::vector<IntVector> out(static_cast<std::size_t>(draws), IntVector(n));
  for (auto& l : out)
    for (Eigen::Index i = 0; i < n; ++i) l(i) = u(gen);
  return out;
}

Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::serial : Backend::openmp;
}

void project(benchmark::State& state) {
  const Matrix y = random_matrix(state.range(1), 150, 1);
  const Matrix phi = random_matrix(4, 150, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::project(backend_of(state), y, phi));
}

void residual_ssr(benchmark::State& state) {
  const Matrix y = random_matrix(state.range(1), 150, 3);
  const Matrix xi = random_matrix(state.range(1), 4, 4);
  const Matrix phi = random_matrix(4, 150, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::residual_sum_of_squares(backend_of(state), y, xi, phi));
}

void allocation_weights(benchmark::State& state) {
  const Vector x = random_matrix(state.range(1), 1, 6).col(0);
  const Vector p = Vector::Constant(20, 1.0 / 20);
  const Vector mu = random_matrix(20, 1, 7).col(0);
  const Vector s = Vector::Constant(20, 2.0);
  Matrix out;
  for (auto _ : state) {
    kernels::allocation_log_weights(backend_of(state), x, p, mu, s, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void coclustering(benchmark::State& state) {
  const auto labels = random_labels(400, state.range(1), 5, 8);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::coclustering(backend_of(state), labels));
}

void bands(benchmark::State& state) {
  std::vector<Matrix> store;
  for (unsigned w = 0; w < 200; ++w) store.push_back(random_matrix(state.range(1), 3, 100 + w));
  std::vector<const Matrix*> xi;
  for (const auto& m : store) xi.push_back(&m);
  const Matrix phi = random_matrix(3, 150, 9);
  const Vector mean = Vector::Zero(150);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::pointwise_bands(backend_of(state), xi, phi, mean, 0.025, 0.975));
}

void sizes(benchmark::internal::Benchmark* b) {
  b->ArgNames({"openmp", "n"});
  for (int backend : {0, 1})
    for (int n : {100, 1000}) b->Args({backend, n});
}

}  // namespace

BENCHMARK(project)->Apply(sizes);
BENCHMARK(residual_ssr)->Apply(sizes);
BENCHMARK(allocation_weights)->Apply(sizes);
BENCHMARK(coclustering)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(bands)->Apply(sizes)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
