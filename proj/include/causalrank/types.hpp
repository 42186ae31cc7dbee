#pragma once

#include <Eigen/Dense>

namespace causalrank {

using Scalar = double;
using Matrix = Eigen::MatrixX<Scalar>;
using Vector = Eigen::VectorX<Scalar>;
using Eigen::Index;

}  // namespace causalrank
