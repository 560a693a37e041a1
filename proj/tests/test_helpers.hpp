#pragma once

#include <vector>

#include "retreg/core/rng.hpp"
#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"
#include "retreg/geometry/pose.hpp"

namespace retreg::testing {

inline PointCloud random_cloud(int n, uint64_t seed, double extent = 1.0, std::string id = "") {
  SplitMix64 rng(seed);
  Eigen::Matrix3Xd pts(3, n);
  for (int i = 0; i < n; ++i) {
    pts.col(i) = Eigen::Vector3d(uniform_in(rng, -extent, extent), uniform_in(rng, -extent, extent),
                                 uniform_in(rng, -extent, extent));
  }
  return PointCloud(std::move(pts), std::move(id));
}

inline Pose random_pose(uint64_t seed, double max_translation = 1.0) {
  SplitMix64 rng(seed);
  const Eigen::Matrix3d rotation = random_rotation(rng);
  const Eigen::Vector3d translation(uniform_in(rng, -max_translation, max_translation),
                                    uniform_in(rng, -max_translation, max_translation),
                                    uniform_in(rng, -max_translation, max_translation));
  const double scale = uniform_in(rng, 0.5, 2.0);
  return Pose(rotation, translation, scale);
}

inline Eigen::Matrix3d rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

inline PointCloud cloud_from(std::vector<Eigen::Vector3d> points, std::string id = "") {
  Eigen::Matrix3Xd pts(3, points.size());
  for (size_t i = 0; i < points.size(); ++i) pts.col(i) = points[i];
  return PointCloud(std::move(pts), std::move(id));
}

// Surface-sampled cloud (unit-ish sphere): neighborhoods have well-defined
// normals, unlike volumetric blobs.
inline PointCloud sphere_cloud(int n, uint64_t seed, double radius = 0.5) {
  SplitMix64 rng(seed);
  Eigen::Matrix3Xd pts(3, n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d v(gaussian(rng), gaussian(rng), gaussian(rng));
    if (v.norm() < 1e-9) v = Eigen::Vector3d::UnitX();
    pts.col(i) = radius * v.normalized();
  }
  return PointCloud(std::move(pts), "sphere");
}

inline FeatureSet random_features(int n, int dim, uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureSet::Matrix rows(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) rows(i, k) = static_cast<float>(uniform_in(rng, -1.0, 1.0));
  }
  return FeatureSet::from_unnormalized(std::move(rows), FeatureSource::external);
}

}  // namespace retreg::testing
