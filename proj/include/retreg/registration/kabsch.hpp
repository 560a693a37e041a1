#pragma once

#include <Eigen/Dense>

#include "retreg/geometry/pose.hpp"

namespace retreg {

// Least-squares rigid transform mapping model_pts onto query_pts (rotation
// via SVD of the cross-covariance with determinant correction, translation
// from centroids, scale fixed at 1). Degenerate (near-collinear) point sets
// are rejected.
Pose kabsch(const Eigen::Matrix3Xd& query_pts, const Eigen::Matrix3Xd& model_pts);

}  // namespace retreg
