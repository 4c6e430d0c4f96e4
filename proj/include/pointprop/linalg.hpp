#pragma once

#include <Eigen/Dense>

namespace pointprop {

// Dense row-major storage throughout: node indices are row-major over the
// patch grid and the on-disk formats are row-major, so keeping Eigen in the
// same layout avoids transposes at the boundaries.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

} // namespace pointprop
