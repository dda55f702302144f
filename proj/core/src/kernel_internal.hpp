#pragma once

#include <Eigen/Dense>

#include "fkbridge/grid.hpp"

namespace fkbridge::detail {

/// Heat-kernel matrix k0(points[i], s, points[j], t) on grid x grid.
Eigen::MatrixXd heat_matrix(const Grid& grid, double s, double t);

/// Positivity scan. Negative entries mean the construction failed
/// (truncated series turned over) and raise ConvergenceError. An exact
/// zero is tolerated only where the heat envelope itself underflows
/// double precision, i.e. where no positive value is representable.
void validate_kernel_entries(const Eigen::MatrixXd& values, const Grid& grid,
                             double s, double t, const char* context);

}  // namespace fkbridge::detail
