#include "fpclust/bspline.hpp"

#include <algorithm>
#include <sstream>

#include "fpclust/error.hpp"

namespace fpclust {

BSplineBasis::BSplineBasis(const TimeGrid& grid, int n_basis, int order)
    : order_(order), n_basis_(n_basis), lo_(grid.front()), hi_(grid.back()) {
  if (order < 1) throw ValidationError("B-spline order must be positive");
  if (n_basis < order)
    throw ValidationError("B-spline basis needs at least " + std::to_string(order) + " functions");
  if (static_cast<std::size_t>(n_basis) > grid.size())
    throw DimensionError("B-spline basis size " + std::to_string(n_basis) +
                         " exceeds the number of time points " + std::to_string(grid.size()));

  const int n_interior = n_basis - order;
  interior_.resize(static_cast<std::size_t>(n_interior));
  for (int q = 0; q < n_interior; ++q)
    interior_[static_cast<std::size_t>(q)] = lo_ + (hi_ - lo_) * (q + 1) / (n_interior + 1);

  full_knots_.assign(static_cast<std::size_t>(order), lo_);
  full_knots_.insert(full_knots_.end(), interior_.begin(), interior_.end());
  full_knots_.insert(full_knots_.end(), static_cast<std::size_t>(order), hi_);

  design_.resize(static_cast<Eigen::Index>(grid.size()), n_basis);
  for (std::size_t t = 0; t < grid.size(); ++t)
    design_.row(static_cast<Eigen::Index>(t)) = evaluate(grid[t]).transpose();
}

int BSplineBasis::default_size(std::size_t time_points, int order) {
  int size = static_cast<int>(std::min<std::size_t>(time_points / 2, 25));
  size = std::max(size, order);
  return std::min(size, static_cast<int>(time_points));
}

Vector BSplineBasis::evaluate(double x) const {
  const auto& k = full_knots_;
  const int degree = order_ - 1;
  x = std::clamp(x, lo_, hi_);

  // Knot span index: last span with k[span] <= x < k[span+1]; the right
  // boundary belongs to the final non-degenerate span.
  int span = order_ - 1 + static_cast<int>(interior_.size());
  if (x < hi_) {
    auto it = std::upper_bound(k.begin() + order_ - 1, k.end() - order_ + 1, x);
    span = static_cast<int>(it - k.begin()) - 1;
  }

  // Cox-de Boor on the degree+1 non-zero functions.
  std::vector<double> n(static_cast<std::size_t>(order_), 0.0), left(n.size()), right(n.size());
  n[0] = 1.0;
  for (int d = 1; d <= degree; ++d) {
    left[static_cast<std::size_t>(d)] = x - k[static_cast<std::size_t>(span + 1 - d)];
    right[static_cast<std::size_t>(d)] = k[static_cast<std::size_t>(span + d)] - x;
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(d - r)];
      const double temp = denom == 0.0 ? 0.0 : n[static_cast<std::size_t>(r)] / denom;
      n[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(d - r)] * temp;
    }
    n[static_cast<std::size_t>(d)] = saved;
  }

  Vector out = Vector::Zero(n_basis_);
  for (int r = 0; r <= degree; ++r) out(span - degree + r) = n[static_cast<std::size_t>(r)];
  return out;
}

Matrix projection_matrix(const BSplineBasis& basis) {
  const Matrix& b = basis.design_matrix();
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  qr.setThreshold(1e-10);
  if (qr.rank() < b.cols()) {
    std::ostringstream msg;
    msg << "B-spline design matrix is rank deficient (rank " << qr.rank() << " of " << b.cols()
        << "); order " << basis.order() << " with " << basis.knots().size()
        << " interior knots at";
    for (double k : basis.knots()) msg << ' ' << k;
    msg << " leaves some basis functions without support on the grid";
    throw NumericalError(msg.str());
  }
  Matrix q = qr.householderQ() * Matrix::Identity(b.rows(), b.cols());
  return q * q.transpose();
}

FunctionalDataset smooth(const FunctionalDataset& dataset, const BSplineBasis& basis) {
  if (static_cast<std::size_t>(basis.design_matrix().rows()) != dataset.grid().size())
    throw DimensionError("basis was built on a different grid");
  const Matrix hat = projection_matrix(basis);
  return dataset.with_values(dataset.values() * hat);
}

}  // namespace fpclust
