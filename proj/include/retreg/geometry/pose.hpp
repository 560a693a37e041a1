#pragma once

#include <Eigen/Dense>
#include <utility>

#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

// Rigid transform with a fixed positive scale: p -> scale * R * p + t.
// Rotation orthonormality and det +1 are enforced at construction.
class Pose {
 public:
  Pose();  // identity
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation, double scale = 1.0);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  double scale() const { return scale_; }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
  double scale_;
};

// Maps every point through the pose; ordering and id are preserved.
PointCloud apply_pose(const PointCloud& cloud, const Pose& pose);

// Inverse of apply_pose: scale^-1 * R^T * (p - t). Converts an annotated
// cloud into normalized canonical coordinates.
PointCloud to_ncc(const PointCloud& cloud, const Pose& annotated_pose);

// Recenters at the centroid and rescales so the centroid-centered bounding
// sphere has unit diameter. Returns the normalized cloud and the pose that
// maps it back onto the input. Clouds with no spread keep scale 1.
std::pair<PointCloud, Pose> normalize_cloud(const PointCloud& cloud);

}  // namespace retreg
