#pragma once

#include <Eigen/Dense>

namespace fpclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::VectorXi;

}  // namespace fpclust
