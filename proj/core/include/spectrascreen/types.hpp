#pragma once

#include <Eigen/Dense>

namespace spectrascreen {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace spectrascreen
