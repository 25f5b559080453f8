#include "fpclust/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fpclust/error.hpp"

namespace fpclust::kernels {

namespace {

using Index = Eigen::Index;

double row_residual(const Matrix& y, const Matrix& xi, const Matrix& phi, Index i) {
  double acc = 0.0;
  for (Index t = 0; t < y.cols(); ++t) {
    double fit = 0.0;
    for (Index k = 0; k < phi.rows(); ++k) fit += xi(i, k) * phi(k, t);
    const double r = y(i, t) - fit;
    acc += r * r;
  }
  return acc;
}

void project_row(const Matrix& y, const Matrix& phi, Index i, Matrix& out) {
  for (Index k = 0; k < phi.rows(); ++k) {
    double acc = 0.0;
    for (Index t = 0; t < y.cols(); ++t) acc += y(i, t) * phi(k, t);
    out(i, k) = acc;
  }
}

void coclustering_row(const std::vector<IntVector>& labels, Index i, Matrix& out) {
  const Index n = out.rows();
  for (Index j = i + 1; j < n; ++j) {
    int together = 0;
    for (const auto& c : labels) together += c(i) == c(j) ? 1 : 0;
    out(i, j) = static_cast<double>(together) / static_cast<double>(labels.size());
  }
}

void band_curve(const std::vector<const Matrix*>& xi, const Matrix& phi, const Vector& mean_curve,
                double lo, double hi, Index i, Bands& out, std::vector<double>& values,
                Matrix& curves) {
  const Index w_count = static_cast<Index>(xi.size());
  const Index t_count = phi.cols();
  for (Index w = 0; w < w_count; ++w) {
    for (Index t = 0; t < t_count; ++t) {
      double x = mean_curve(t);
      for (Index k = 0; k < phi.rows(); ++k) x += (*xi[static_cast<std::size_t>(w)])(i, k) * phi(k, t);
      curves(w, t) = x;
    }
  }
  values.resize(static_cast<std::size_t>(w_count));
  for (Index t = 0; t < t_count; ++t) {
    double sum = 0.0;
    for (Index w = 0; w < w_count; ++w) {
      values[static_cast<std::size_t>(w)] = curves(w, t);
      sum += curves(w, t);
    }
    std::sort(values.begin(), values.end());
    out.mean(i, t) = sum / static_cast<double>(w_count);
    out.lower(i, t) = sorted_quantile(values.data(), values.size(), lo);
    out.upper(i, t) = sorted_quantile(values.data(), values.size(), hi);
  }
}

}  // namespace

Backend default_backend() noexcept {
#ifdef _OPENMP
  return Backend::openmp;
#else
  return Backend::serial;
#endif
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int threads) noexcept {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

Matrix project(Backend backend, const Matrix& y, const Matrix& phi) {
  if (y.cols() != phi.cols()) throw DimensionError("project: time dimension mismatch");
  Matrix out(y.rows(), phi.rows());
  const Index n = y.rows();
  if (backend == Backend::serial) {
    for (Index i = 0; i < n; ++i) project_row(y, phi, i, out);
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) project_row(y, phi, i, out);
  }
  return out;
}

double residual_sum_of_squares(Backend backend, const Matrix& y, const Matrix& xi,
                               const Matrix& phi) {
  if (y.rows() != xi.rows() || y.cols() != phi.cols() || xi.cols() != phi.rows())
    throw DimensionError("residual_sum_of_squares: shape mismatch");
  const Index n = y.rows();
  if (backend == Backend::serial) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) total += row_residual(y, xi, phi, i);
    return total;
  }
  std::vector<double> partial(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] = row_residual(y, xi, phi, i);
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

void allocation_log_weights(Backend backend, const Eigen::Ref<const Vector>& x, const Vector& p,
                            const Vector& mu, const Vector& s, Matrix& out) {
  const Index n = x.size();
  const Index j_count = p.size();
  if (mu.size() != j_count || s.size() != j_count)
    throw DimensionError("allocation_log_weights: cluster parameter mismatch");
  out.resize(n, j_count);
  Vector base(j_count);
  for (Index j = 0; j < j_count; ++j)
    base(j) = p(j) > 0.0 ? std::log(p(j)) + 0.5 * std::log(s(j))
                         : -std::numeric_limits<double>::infinity();
  auto fill = [&](Index i) {
    for (Index j = 0; j < j_count; ++j) {
      const double d = x(i) - mu(j);
      out(i, j) = base(j) - 0.5 * s(j) * d * d;
    }
  };
  if (backend == Backend::serial) {
    for (Index i = 0; i < n; ++i) fill(i);
  } else {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) fill(i);
  }
}

Matrix coclustering(Backend backend, const std::vector<IntVector>& labels) {
  if (labels.empty()) throw DimensionError("coclustering needs at least one label vector");
  const Index n = labels.front().size();
  for (const auto& c : labels)
    if (c.size() != n) throw DimensionError("coclustering: label vectors differ in length");
  Matrix out = Matrix::Identity(n, n);
  if (backend == Backend::serial) {
    for (Index i = 0; i < n; ++i) coclustering_row(labels, i, out);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (Index i = 0; i < n; ++i) coclustering_row(labels, i, out);
  }
  out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  return out;
}

double sorted_quantile(const double* sorted, std::size_t count, double prob) {
  if (count == 0) throw DimensionError("quantile of an empty sample");
  const double h = (static_cast<double>(count) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= count) return sorted[count - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Bands pointwise_bands(Backend backend, const std::vector<const Matrix*>& xi, const Matrix& phi,
                      const Vector& mean_curve, double lo, double hi) {
  if (xi.empty()) throw DimensionError("pointwise_bands needs at least one snapshot");
  const Index n = xi.front()->rows();
  const Index t_count = phi.cols();
  if (mean_curve.size() != t_count) throw DimensionError("pointwise_bands: mean curve length");
  for (const Matrix* m : xi)
    if (m->rows() != n || m->cols() != phi.rows())
      throw DimensionError("pointwise_bands: snapshot shape mismatch");
  Bands out{Matrix(n, t_count), Matrix(n, t_count), Matrix(n, t_count)};
  const Index w_count = static_cast<Index>(xi.size());
  if (backend == Backend::serial) {
    std::vector<double> values;
    Matrix curves(w_count, t_count);
    for (Index i = 0; i < n; ++i) band_curve(xi, phi, mean_curve, lo, hi, i, out, values, curves);
  } else {
#pragma omp parallel
    {
      std::vector<double> values;
      Matrix curves(w_count, t_count);
#pragma omp for schedule(dynamic)
      for (Index i = 0; i < n; ++i) band_curve(xi, phi, mean_curve, lo, hi, i, out, values, curves);
    }
  }
  return out;
}

}  // namespace fpclust::kernels
