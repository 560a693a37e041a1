#pragma once

#include <Eigen/Dense>
#include <vector>

namespace retreg {

// Shared by the k-d tree and the serial reference kernels so both paths
// round identically and oracle equivalence is exact, not approximate.
inline double squared_distance(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// Exact nearest-neighbor index over a fixed set of 3D points.
class KdTree3 {
 public:
  explicit KdTree3(const Eigen::Matrix3Xd& points);

  // Squared distance from q to its nearest point.
  double nearest_squared(const Eigen::Vector3d& q) const;

  // Indices of all points with ||p - q|| < radius (strict), ascending.
  std::vector<int> radius_indices(const Eigen::Vector3d& q, double radius) const;

  int size() const { return static_cast<int>(points_.cols()); }

 private:
  struct Node {
    double split = 0.0;
    int axis = -1;       // -1 marks a leaf
    int left = -1;
    int right = -1;
    int begin = 0;       // leaf range into order_
    int end = 0;
  };

  int build(int begin, int end);
  void nearest(int node, const Eigen::Vector3d& q, double& best) const;
  void in_radius(int node, const Eigen::Vector3d& q, double radius, double radius_sq,
                 std::vector<int>& out) const;

  Eigen::Matrix3Xd points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace retreg
