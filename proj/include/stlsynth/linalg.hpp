#pragma once

#include <Eigen/Dense>
#include <vector>

namespace stlsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::Vector2d;

using Point2 = Eigen::Vector2d;
using Polygon = std::vector<Point2>;

/// Index list selecting a sub-vector of the state, e.g. the position
/// coordinates {0, 2} of a planar double integrator.
using Projection = std::vector<int>;

MatrixXd projection_matrix(const Projection& indices, int dim);

}  // namespace stlsynth
