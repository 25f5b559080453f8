#pragma once

#include <vector>

#include "fpclust/linalg.hpp"

// Data-parallel inner loops of the sampler and of the posterior summaries.
// Every kernel has a serial reference and an OpenMP version. Both produce
// bit-identical output: parallel loops only write disjoint slots, and any
// reduction is finished serially in a fixed order.
namespace fpclust::kernels {

enum class Backend { serial, openmp };

/// Backend chosen by default (openmp when compiled with OpenMP).
Backend default_backend() noexcept;
/// Number of OpenMP threads kernels may use (1 without OpenMP).
int max_threads() noexcept;
void set_threads(int threads) noexcept;

/// y (n x T) times phi' (K x T)' -> n x K projections.
Matrix project(Backend backend, const Matrix& y, const Matrix& phi);

/// sum_i sum_t (y_it - sum_k xi_ik phi_kt)^2.
double residual_sum_of_squares(Backend backend, const Matrix& y, const Matrix& xi,
                               const Matrix& phi);

/// out(i, j) = log p_j + log(s_j)/2 - s_j (x_i - mu_j)^2 / 2, with -inf where
/// p_j = 0. `out` is resized to n x J.
void allocation_log_weights(Backend backend, const Eigen::Ref<const Vector>& x, const Vector& p,
                            const Vector& mu, const Vector& s, Matrix& out);

/// Fraction of label vectors in which items i and i' share a label.
Matrix coclustering(Backend backend, const std::vector<IntVector>& labels);

struct Bands {
  Matrix mean;
  Matrix lower;
  Matrix upper;
};

/// For each curve i and time t, the mean and the lo/hi empirical quantiles
/// (linear interpolation between order statistics) of
/// mean_curve_t + sum_k xi^(w)_ik phi_kt over snapshots w.
Bands pointwise_bands(Backend backend, const std::vector<const Matrix*>& xi, const Matrix& phi,
                      const Vector& mean_curve, double lo, double hi);

/// Linear-interpolation quantile of an ascending sorted range.
double sorted_quantile(const double* sorted, std::size_t count, double prob);

}  // namespace fpclust::kernels
