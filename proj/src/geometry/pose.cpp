#include "retreg/geometry/pose.hpp"

#include <cmath>

namespace retreg {

namespace {
constexpr double kRotationTolerance = 1e-9;
}

Pose::Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()), scale_(1.0) {}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation, double scale)
    : rotation_(rotation), translation_(translation), scale_(scale) {
  if (!rotation_.allFinite() || !translation_.allFinite() || !std::isfinite(scale_)) {
    fail(Errc::non_finite, "non-finite pose");
  }
  const Eigen::Matrix3d gram = rotation_.transpose() * rotation_;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kRotationTolerance) {
    fail(Errc::invalid_argument, "pose rotation is not orthonormal");
  }
  if (std::abs(rotation_.determinant() - 1.0) > kRotationTolerance) {
    fail(Errc::invalid_argument, "pose rotation determinant is not +1");
  }
  if (scale_ <= 0.0) {
    fail(Errc::invalid_argument, "pose scale must be positive");
  }
}

PointCloud apply_pose(const PointCloud& cloud, const Pose& pose) {
  Eigen::Matrix3Xd mapped =
      (pose.scale() * (pose.rotation() * cloud.points())).colwise() + pose.translation();
  return PointCloud(std::move(mapped), cloud.id());
}

PointCloud to_ncc(const PointCloud& cloud, const Pose& annotated_pose) {
  Eigen::Matrix3Xd centered = cloud.points().colwise() - annotated_pose.translation();
  Eigen::Matrix3Xd mapped = (annotated_pose.rotation().transpose() * centered) / annotated_pose.scale();
  return PointCloud(std::move(mapped), cloud.id());
}

std::pair<PointCloud, Pose> normalize_cloud(const PointCloud& cloud) {
  const Eigen::Vector3d centroid = cloud.points().rowwise().mean();
  const Eigen::Matrix3Xd centered = cloud.points().colwise() - centroid;
  const double radius = centered.colwise().norm().maxCoeff();
  const double diameter = 2.0 * radius;
  const double scale = diameter > 1e-12 ? diameter : 1.0;
  Pose annotation(Eigen::Matrix3d::Identity(), centroid, scale);
  return {to_ncc(cloud, annotation), annotation};
}

}  // namespace retreg
