#include "fpclust/conditionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "fpclust/error.hpp"

namespace fpclust {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSliceExpansions = 100;
constexpr int kSliceShrinks = 1000;

// Largest stick strictly below one, so that log(1 - p') stays finite.
const double kMaxStick = std::nextafter(1.0, 0.0);

double log_sigma_density(double sigma, int count, double sum_squares) {
  if (sigma <= 0.0) return -std::numeric_limits<double>::infinity();
  return -static_cast<double>(count) * std::log(sigma) - sum_squares / (2.0 * sigma * sigma);
}

}  // namespace

ScoreLikelihood::ScoreLikelihood(const Matrix& centred, const Matrix& eigenfunctions,
                                 kernels::Backend backend_)
    : y(centred), phi(eigenfunctions), backend(backend_) {
  if (y.cols() != phi.cols())
    throw DimensionError("centred data and eigenfunctions have different time lengths");
  data_projection = kernels::project(backend, y, phi);
  gram = phi * phi.transpose();
}

double ScoreLikelihood::residual_projection(const Matrix& xi, Eigen::Index i, Eigen::Index k) const {
  double proj = data_projection(i, k);
  for (Eigen::Index other = 0; other < gram.rows(); ++other)
    if (other != k) proj -= xi(i, other) * gram(other, k);
  return proj;
}

double ScoreLikelihood::residual_sum_of_squares(const Matrix& xi) const {
  return kernels::residual_sum_of_squares(backend, y, xi, phi);
}

double ScoreLikelihood::log_likelihood(const Matrix& xi, double tau) const {
  const double count = static_cast<double>(y.size());
  return 0.5 * count * std::log(tau / (2.0 * kPi)) - 0.5 * tau * residual_sum_of_squares(xi);
}

NormalParams xi_conditional(double tau, double s, double mu, double projection, double norm2) {
  const double precision = tau * norm2 + s;
  return {(tau * projection + s * mu) / precision, 1.0 / precision};
}

GammaParams tau_conditional(double ssr, Eigen::Index curves, Eigen::Index time_points,
                            double a_prime, double b_prime) {
  return {0.5 * static_cast<double>(curves * time_points) + a_prime, 0.5 * ssr + b_prime};
}

NormalParams mu_conditional(int count, double sum, double s, double r, double v) {
  const double precision = count * s + r;
  return {(s * sum + v * r) / precision, 1.0 / precision};
}

GammaParams scale_conditional(int count, double sum_squares, double z, double beta) {
  return {0.5 * count + z, 0.5 * sum_squares + beta};
}

Vector stick_weights(const Eigen::Ref<const Vector>& p_raw) {
  const Eigen::Index j_count = p_raw.size();
  Vector p(j_count);
  double remaining = 1.0;
  for (Eigen::Index j = 0; j + 1 < j_count; ++j) {
    p(j) = p_raw(j) * remaining;
    remaining *= 1.0 - p_raw(j);
  }
  if (j_count > 0) p(j_count - 1) = remaining;
  return p;
}

Vector sticks_from_weights(const Eigen::Ref<const Vector>& weights) {
  const Eigen::Index j_count = weights.size();
  Vector sticks(j_count);
  double tail = weights.sum();
  for (Eigen::Index j = 0; j + 1 < j_count; ++j) {
    sticks(j) = tail > 0.0 ? std::min(weights(j) / tail, 1.0) : 0.0;
    tail -= weights(j);
  }
  if (j_count > 0) sticks(j_count - 1) = 1.0;
  return sticks;
}

double truncated_gamma(double shape, double rate, double upper, Rng& rng) {
  if (!(upper > 0.0)) throw ValidationError("truncated_gamma: upper bound must be positive");
  if (!(rate > 0.0)) return upper * rng.uniform_open_low();
  const double x_max = rate * upper;
  const double cdf_max = boost::math::gamma_p(shape, x_max);
  if (cdf_max > 1e-300) {
    try {
      const double u = cdf_max * rng.uniform_open_low();
      const double draw = boost::math::gamma_p_inv(shape, u) / rate;
      if (draw > 0.0 && std::isfinite(draw)) return std::min(draw, upper);
    } catch (const std::exception&) {
      // fall through to the small-argument limit
    }
  }
  // Density proportional to a^(shape-1) when rate * upper is negligible.
  return upper * std::pow(rng.uniform_open_low(), 1.0 / shape);
}

double slice_sample_sigma(double current, int count, double sum_squares, double upper, Rng& rng) {
  if (!(upper > 0.0)) throw ValidationError("slice sampler: upper bound must be positive");
  double x0 = std::clamp(current, upper * 1e-12, upper);
  if (!std::isfinite(x0)) x0 = 0.5 * upper;
  const double log_level =
      log_sigma_density(x0, count, sum_squares) + std::log(rng.uniform_open_low());

  const double width = 0.1 * upper;
  double left = x0 - width * rng.uniform();
  double right = left + width;
  for (int step = 0; step < kSliceExpansions && left > 0.0 &&
                     log_sigma_density(left, count, sum_squares) > log_level;
       ++step)
    left -= width;
  for (int step = 0; step < kSliceExpansions && right < upper &&
                     log_sigma_density(right, count, sum_squares) > log_level;
       ++step)
    right += width;
  left = std::max(left, 0.0);
  right = std::min(right, upper);

  for (int step = 0; step < kSliceShrinks; ++step) {
    const double x1 = left + rng.uniform_open_low() * (right - left);
    if (x1 > 0.0 && log_sigma_density(x1, count, sum_squares) >= log_level) return x1;
    if (x1 < x0)
      left = x1;
    else
      right = x1;
  }
  throw NumericalError("block 's': slice sampler for the cluster standard deviation did not converge");
}

int categorical_from_log(const Eigen::Ref<const Vector>& log_weights, Rng& rng) {
  const double top = log_weights.maxCoeff();
  if (!(top > -std::numeric_limits<double>::infinity()) || std::isnan(top))
    throw NumericalError("block 'c': every allocation log-weight is -inf or NaN");
  const Eigen::Index count = log_weights.size();
  double total = 0.0;
  thread_local std::vector<double> weights;
  weights.resize(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j) {
    weights[static_cast<std::size_t>(j)] = std::exp(log_weights(j) - top);
    total += weights[static_cast<std::size_t>(j)];
  }
  double u = rng.uniform() * total;
  int last_positive = 0;
  for (Eigen::Index j = 0; j < count; ++j) {
    const double w = weights[static_cast<std::size_t>(j)];
    if (w > 0.0) {
      last_positive = static_cast<int>(j);
      if (u < w) return static_cast<int>(j);
      u -= w;
    }
  }
  return last_positive;
}

std::vector<int> cluster_counts(const Eigen::Ref<const IntVector>& labels, int clusters) {
  std::vector<int> counts(static_cast<std::size_t>(clusters), 0);
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(labels(i))];
  return counts;
}

void sample_xi(McmcState& state, const ScoreLikelihood& lik, Rng& rng) {
  const Eigen::Index n = state.xi.rows();
  for (int k = 0; k < state.k(); ++k) {
    const double norm2 = lik.gram(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int j = state.c(i, k);
      const double proj = lik.residual_projection(state.xi, i, k);
      const auto post = xi_conditional(state.tau, state.s(j, k), state.mu(j, k), proj, norm2);
      state.xi(i, k) = rng.normal(post.mean, std::sqrt(post.variance));
    }
  }
}

void sample_tau(McmcState& state, const ScoreLikelihood& lik, const ModelConfig& model, Rng& rng) {
  if (model.fixed_tau) {
    state.tau = *model.fixed_tau;
    return;
  }
  const double ssr = lik.residual_sum_of_squares(state.xi);
  const auto post =
      tau_conditional(ssr, lik.curves(), lik.time_points(), model.a_prime, model.b_prime);
  state.tau = rng.gamma(post.shape, post.rate);
}

void sample_mu(McmcState& state, int k, const ModelConfig& model, Rng& rng) {
  if (model.mode == Mode::standard_bfpca) {
    state.mu.col(k).setZero();
    return;
  }
  const auto& prior = model.dims[static_cast<std::size_t>(k)];
  const int j_count = state.clusters();
  std::vector<int> counts(static_cast<std::size_t>(j_count), 0);
  std::vector<double> sums(static_cast<std::size_t>(j_count), 0.0);
  for (Eigen::Index i = 0; i < state.xi.rows(); ++i) {
    const auto j = static_cast<std::size_t>(state.c(i, k));
    ++counts[j];
    sums[j] += state.xi(i, k);
  }
  for (int j = 0; j < j_count; ++j) {
    const auto post = mu_conditional(counts[static_cast<std::size_t>(j)],
                                      sums[static_cast<std::size_t>(j)], state.s(j, k), prior.r, prior.v);
    state.mu(j, k) = rng.normal(post.mean, std::sqrt(post.variance));
  }
}

void sample_scale(McmcState& state, int k, const ModelConfig& model, Rng& rng) {
  const auto& prior = model.dims[static_cast<std::size_t>(k)];
  if (prior.fixed_scale) {
    state.s.col(k).setConstant(*prior.fixed_scale);
    return;
  }
  const int j_count = state.clusters();
  std::vector<int> counts(static_cast<std::size_t>(j_count), 0);
  std::vector<double> squares(static_cast<std::size_t>(j_count), 0.0);
  for (Eigen::Index i = 0; i < state.xi.rows(); ++i) {
    const int j = state.c(i, k);
    const double d = state.xi(i, k) - state.mu(j, k);
    ++counts[static_cast<std::size_t>(j)];
    squares[static_cast<std::size_t>(j)] += d * d;
  }
  for (int j = 0; j < j_count; ++j) {
    const int count = counts[static_cast<std::size_t>(j)];
    const double ss = squares[static_cast<std::size_t>(j)];
    if (prior.scale_prior == ScalePrior::gamma_precision) {
      const auto post = scale_conditional(count, ss, prior.z, prior.beta);
      state.s(j, k) = rng.gamma(post.shape, post.rate);
    } else {
      const double sigma = slice_sample_sigma(1.0 / std::sqrt(state.s(j, k)), count, ss, prior.upper, rng);
      state.s(j, k) = 1.0 / (sigma * sigma);
    }
  }
}

void sample_c(McmcState& state, int k, Rng& rng, kernels::Backend backend) {
  if (state.clusters() == 1) {
    state.c.col(k).setZero();
    return;
  }
  thread_local Matrix log_weights;
  kernels::allocation_log_weights(backend, state.xi.col(k), state.p.col(k), state.mu.col(k),
                                  state.s.col(k), log_weights);
  for (Eigen::Index i = 0; i < state.xi.rows(); ++i)
    state.c(i, k) = categorical_from_log(log_weights.row(i).transpose(), rng);
}

void sample_sticks(McmcState& state, int k, Rng& rng) {
  const int j_count = state.clusters();
  if (j_count == 1) {
    state.p_raw(0, k) = 1.0;
    state.p(0, k) = 1.0;
    return;
  }
  const auto counts = cluster_counts(state.c.col(k), j_count);
  std::vector<int> tail(static_cast<std::size_t>(j_count) + 1, 0);
  for (int j = j_count - 1; j >= 0; --j)
    tail[static_cast<std::size_t>(j)] = tail[static_cast<std::size_t>(j) + 1] + counts[static_cast<std::size_t>(j)];
  for (int j = 0; j + 1 < j_count; ++j) {
    const double a = counts[static_cast<std::size_t>(j)] + 1.0;
    const double b = state.alpha(k) + tail[static_cast<std::size_t>(j) + 1];
    state.p_raw(j, k) = std::min(rng.beta(a, b), kMaxStick);
  }
  state.p_raw(j_count - 1, k) = 1.0;
  state.p.col(k) = stick_weights(state.p_raw.col(k));
}

void sample_alpha(McmcState& state, int k, const ModelConfig& model, Rng& rng) {
  const int j_count = state.clusters();
  if (j_count == 1) return;
  const auto& prior = model.dims[static_cast<std::size_t>(k)];
  double rate = 0.0;
  for (int j = 0; j + 1 < j_count; ++j) rate -= std::log1p(-state.p_raw(j, k));
  if (rate == 0.0) {
    state.alpha(k) = prior.q * rng.uniform_open_low();
    return;
  }
  state.alpha(k) = truncated_gamma(model.truncation + 1.0, rate, prior.q, rng);
}

McmcState relabel(const McmcState& state, Relabel rule) {
  McmcState out = state;
  const int j_count = state.clusters();
  if (j_count == 1) return out;
  std::vector<int> order(static_cast<std::size_t>(j_count));
  std::vector<int> inverse(static_cast<std::size_t>(j_count));
  for (int k = 0; k < state.k(); ++k) {
    const auto counts = cluster_counts(state.c.col(k), j_count);
    std::iota(order.begin(), order.end(), 0);
    auto key = [&](int j) { return rule == Relabel::by_mean ? state.mu(j, k) : state.p(j, k); };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const bool empty_a = counts[static_cast<std::size_t>(a)] == 0;
      const bool empty_b = counts[static_cast<std::size_t>(b)] == 0;
      if (empty_a != empty_b) return !empty_a;
      return key(a) < key(b);
    });
    for (int pos = 0; pos < j_count; ++pos) {
      const int old = order[static_cast<std::size_t>(pos)];
      inverse[static_cast<std::size_t>(old)] = pos;
      out.mu(pos, k) = state.mu(old, k);
      out.s(pos, k) = state.s(old, k);
      out.p(pos, k) = state.p(old, k);
    }
    for (Eigen::Index i = 0; i < state.c.rows(); ++i)
      out.c(i, k) = inverse[static_cast<std::size_t>(state.c(i, k))];
    out.p_raw.col(k) = sticks_from_weights(out.p.col(k));
  }
  return out;
}

}  // namespace fpclust
