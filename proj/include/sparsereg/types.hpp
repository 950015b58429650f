#pragma once

#include <Eigen/Dense>

namespace sparsereg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

}  // namespace sparsereg
