#include "retreg/core/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace retreg {

KdTree3::KdTree3(const Eigen::Matrix3Xd& points) : points_(points) {
  order_.resize(points_.cols());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * order_.size() / kLeafSize + 8);
  if (!order_.empty()) root_ = build(0, static_cast<int>(order_.size()));
}

int KdTree3::build(int begin, int end) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }

  Eigen::Vector3d lo = points_.col(order_[begin]);
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(order_[i]));
    hi = hi.cwiseMax(points_.col(order_[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_(axis, a) < points_(axis, b); });

  nodes_[index].axis = axis;
  nodes_[index].split = points_(axis, order_[mid]);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

double KdTree3::nearest_squared(const Eigen::Vector3d& q) const {
  double best = std::numeric_limits<double>::infinity();
  nearest(root_, q, best);
  return best;
}

void KdTree3::nearest(int node, const Eigen::Vector3d& q, double& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const double d2 = squared_distance(q, points_.col(order_[i]));
      if (d2 < best) best = d2;
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int first = diff < 0.0 ? n.left : n.right;
  const int second = diff < 0.0 ? n.right : n.left;
  nearest(first, q, best);
  if (diff * diff < best) nearest(second, q, best);
}

std::vector<int> KdTree3::radius_indices(const Eigen::Vector3d& q, double radius) const {
  std::vector<int> out;
  if (root_ >= 0 && radius > 0.0) in_radius(root_, q, radius, radius * radius, out);
  std::sort(out.begin(), out.end());
  return out;
}

void KdTree3::in_radius(int node, const Eigen::Vector3d& q, double radius, double radius_sq,
                        std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      if (squared_distance(q, points_.col(order_[i])) < radius_sq) out.push_back(order_[i]);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  if (diff < radius) in_radius(n.left, q, radius, radius_sq, out);
  if (-diff < radius) in_radius(n.right, q, radius, radius_sq, out);
}

}  // namespace retreg
