#include "retreg/registration/kabsch.hpp"

namespace retreg {

Pose kabsch(const Eigen::Matrix3Xd& query_pts, const Eigen::Matrix3Xd& model_pts) {
  const auto n = query_pts.cols();
  if (n != model_pts.cols() || n < 3) {
    fail(Errc::invalid_argument, "kabsch needs matched point sets of size >= 3");
  }

  const Eigen::Vector3d query_mean = query_pts.rowwise().mean();
  const Eigen::Vector3d model_mean = model_pts.rowwise().mean();
  const Eigen::Matrix3Xd q = query_pts.colwise() - query_mean;
  const Eigen::Matrix3Xd m = model_pts.colwise() - model_mean;

  const Eigen::Matrix3d cross = m * q.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  if (!(sigma[0] > 0.0) || sigma[1] < 1e-12 * sigma[0]) {
    fail(Errc::degenerate, "degenerate correspondence set");
  }

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rotation_raw = svd.matrixV() * d * svd.matrixU().transpose();

  // Re-orthonormalize: project onto the nearest rotation so downstream pose
  // checks hold to 1e-12 even after accumulated rounding.
  Eigen::JacobiSVD<Eigen::Matrix3d> polish(rotation_raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d2 = Eigen::Matrix3d::Identity();
  d2(2, 2) = (polish.matrixU() * polish.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d rotation = polish.matrixU() * d2 * polish.matrixV().transpose();

  return Pose(rotation, query_mean - rotation * model_mean);
}

}  // namespace retreg
