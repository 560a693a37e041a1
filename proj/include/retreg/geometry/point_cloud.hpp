#pragma once

#include <Eigen/Dense>
#include <string>

#include "retreg/core/errors.hpp"

namespace retreg {

// Ordered set of 3D points. Index i refers to the same point for the cloud's
// lifetime; correspondences are expressed in these indices. Immutable after
// construction.
class PointCloud {
 public:
  explicit PointCloud(Eigen::Matrix3Xd points, std::string id = "");

  int size() const { return static_cast<int>(points_.cols()); }
  Eigen::Vector3d point(int i) const { return points_.col(i); }
  const Eigen::Matrix3Xd& points() const { return points_; }
  const std::string& id() const { return id_; }

 private:
  Eigen::Matrix3Xd points_;
  std::string id_;
};

struct Correspondence {
  int query_index = 0;
  int model_index = 0;

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

}  // namespace retreg
