#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

PointCloud::PointCloud(Eigen::Matrix3Xd points, std::string id)
    : points_(std::move(points)), id_(std::move(id)) {
  if (points_.cols() == 0) {
    fail(Errc::empty_cloud, id_.empty() ? "empty cloud" : "empty cloud '" + id_ + "'");
  }
  if (!points_.allFinite()) {
    fail(Errc::non_finite,
         id_.empty() ? "non-finite point coordinate" : "non-finite point coordinate in '" + id_ + "'");
  }
}

}  // namespace retreg
