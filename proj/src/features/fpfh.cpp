#include "retreg/features/fpfh.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "retreg/core/kdtree.hpp"

namespace retreg {

namespace {

constexpr int kBins = 11;
constexpr int kDim = 3 * kBins;
constexpr double kPi = 3.14159265358979323846;

int clamp_bin(double t) {
  const int b = static_cast<int>(std::floor(t * kBins));
  return std::clamp(b, 0, kBins - 1);
}

// Darboux-frame angle triple for an oriented point pair; false when the
// frame is undefined (coincident points or normal parallel to the line).
bool pair_features(const Eigen::Vector3d& p1, const Eigen::Vector3d& n1,
                   const Eigen::Vector3d& p2, const Eigen::Vector3d& n2, double& alpha,
                   double& phi, double& theta) {
  Eigen::Vector3d dp = p2 - p1;
  const double d = dp.norm();
  if (d == 0.0) return false;

  Eigen::Vector3d ns = n1;
  Eigen::Vector3d nt = n2;
  const double angle1 = ns.dot(dp) / d;
  const double angle2 = nt.dot(dp) / d;
  // The point whose normal is closer to the connecting line acts as source.
  if (std::abs(angle2) > std::abs(angle1)) {
    std::swap(ns, nt);
    dp = -dp;
    phi = angle2;
  } else {
    phi = angle1;
  }

  Eigen::Vector3d v = dp.cross(ns);
  const double v_norm = v.norm();
  if (v_norm == 0.0) return false;
  v /= v_norm;
  const Eigen::Vector3d w = ns.cross(v);

  alpha = v.dot(nt);
  theta = std::atan2(w.dot(nt), ns.dot(nt));
  return true;
}

// PCA normal of a neighborhood; empty result when fewer than 3 members.
bool pca_normal(const Eigen::Matrix3Xd& pts, const std::vector<int>& nbrs,
                Eigen::Vector3d& normal) {
  if (nbrs.size() < 3) return false;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int j : nbrs) mean += pts.col(j);
  mean /= static_cast<double>(nbrs.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int j : nbrs) {
    const Eigen::Vector3d d = pts.col(j) - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success) return false;
  normal = eig.eigenvectors().col(0);  // smallest eigenvalue
  return true;
}

// Deterministic orientation: away from the cloud centroid, falling back to a
// canonical sign when the point sits on the centroid sphere tangent plane.
void orient_normal(const Eigen::Vector3d& point, const Eigen::Vector3d& centroid,
                   Eigen::Vector3d& normal) {
  const double dot = normal.dot(point - centroid);
  if (dot < -1e-12) {
    normal = -normal;
  } else if (std::abs(dot) <= 1e-12) {
    int axis = 0;
    normal.cwiseAbs().maxCoeff(&axis);
    if (normal[axis] < 0.0) normal = -normal;
  }
}

}  // namespace

FeatureSet extract_fpfh(const PointCloud& cloud, const FpfhParams& params) {
  if (cloud.size() < 5) fail(Errc::invalid_argument, "FPFH needs at least 5 points");
  if (!(params.normal_radius > 0.0) || !(params.feature_radius > 0.0)) {
    fail(Errc::invalid_argument, "FPFH radii must be positive");
  }

  const Eigen::Matrix3Xd& pts = cloud.points();
  const int n = cloud.size();
  const KdTree3 tree(pts);
  const Eigen::Vector3d centroid = pts.rowwise().mean();

  std::vector<Eigen::Vector3d> normals(n, Eigen::Vector3d::UnitZ());
  std::vector<char> normal_valid(n, 0);
#pragma omp parallel for schedule(dynamic, 32)
  for (int i = 0; i < n; ++i) {
    const std::vector<int> nbrs = tree.radius_indices(pts.col(i), params.normal_radius);
    Eigen::Vector3d normal;
    if (pca_normal(pts, nbrs, normal)) {
      orient_normal(pts.col(i), centroid, normal);
      normals[i] = normal;
      normal_valid[i] = 1;
    }
  }

  // Simplified point feature histograms per point.
  std::vector<std::vector<int>> neighborhoods(n);
  Eigen::MatrixXd spfh = Eigen::MatrixXd::Zero(n, kDim);
#pragma omp parallel for schedule(dynamic, 32)
  for (int i = 0; i < n; ++i) {
    std::vector<int> nbrs = tree.radius_indices(pts.col(i), params.feature_radius);
    std::erase(nbrs, i);
    neighborhoods[i] = std::move(nbrs);
    if (!normal_valid[i]) continue;

    int used = 0;
    for (int j : neighborhoods[i]) {
      if (!normal_valid[j]) continue;
      double alpha, phi, theta;
      if (!pair_features(pts.col(i), normals[i], pts.col(j), normals[j], alpha, phi, theta)) {
        continue;
      }
      spfh(i, clamp_bin((alpha + 1.0) / 2.0)) += 1.0;
      spfh(i, kBins + clamp_bin((phi + 1.0) / 2.0)) += 1.0;
      spfh(i, 2 * kBins + clamp_bin((theta + kPi) / (2.0 * kPi))) += 1.0;
      ++used;
    }
    if (used > 0) spfh.row(i) /= static_cast<double>(used);
  }

  // Weighted accumulation over the neighborhood, then row normalization.
  FeatureSet::Matrix out(n, kDim);
#pragma omp parallel for schedule(dynamic, 32)
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row(kDim);
    if (static_cast<int>(neighborhoods[i].size()) + 1 < 3) {
      row.setOnes();  // uniform histogram for starved neighborhoods
    } else {
      row = spfh.row(i);
      Eigen::VectorXd weighted = Eigen::VectorXd::Zero(kDim);
      int used = 0;
      for (int j : neighborhoods[i]) {
        const double dist = (pts.col(j) - pts.col(i)).norm();
        if (dist <= 0.0) continue;
        weighted += spfh.row(j).transpose() / dist;
        ++used;
      }
      if (used > 0) row += weighted / static_cast<double>(used);
      if (row.isZero()) row.setOnes();
    }
    const double norm = row.norm();
    for (int k = 0; k < kDim; ++k) out(i, k) = static_cast<float>(row[k] / norm);
  }

  return FeatureSet(std::move(out), FeatureSource::fpfh);
}

}  // namespace retreg
