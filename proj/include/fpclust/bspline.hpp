#pragma once

#include "fpclust/dataset.hpp"
#include "fpclust/linalg.hpp"

namespace fpclust {

/// Clamped B-spline basis with equally spaced interior knots over the span
/// of a time grid, evaluated at the grid points.
class BSplineBasis {
 public:
  BSplineBasis(const TimeGrid& grid, int n_basis, int order = 4);

  /// min(floor(T/2), 25) cubic functions, never fewer than the order.
  static int default_size(std::size_t time_points, int order = 4);

  int order() const noexcept { return order_; }
  int n_basis() const noexcept { return n_basis_; }
  /// Interior knots only.
  const std::vector<double>& knots() const noexcept { return interior_; }
  /// T x n_basis matrix of basis evaluations.
  const Matrix& design_matrix() const noexcept { return design_; }

  /// Evaluates all basis functions at x (inside the grid span).
  Vector evaluate(double x) const;

 private:
  int order_;
  int n_basis_;
  double lo_;
  double hi_;
  std::vector<double> interior_;
  std::vector<double> full_knots_;
  Matrix design_;
};

/// Least-squares projection of every curve onto the span of the basis.
FunctionalDataset smooth(const FunctionalDataset& dataset, const BSplineBasis& basis);

/// T x T hat matrix B (B'B)^-1 B'. Throws NumericalError when B is rank deficient.
Matrix projection_matrix(const BSplineBasis& basis);

}  // namespace fpclust
