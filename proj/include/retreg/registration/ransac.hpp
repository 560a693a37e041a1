#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "retreg/geometry/point_cloud.hpp"
#include "retreg/geometry/pose.hpp"

namespace retreg {

struct RansacParams {
  int iterations = 10000;
  double inlier_threshold = 0.05;  // NCC units
  uint64_t seed = 0;
  double early_exit_inlier_ratio = 0.9;
};

struct RegistrationResult {
  Pose pose;                     // maps model onto query
  int inlier_count = 0;
  std::string hypothesis_label;  // winning class mapping, or "unconstrained"
  double alignment_scd = 0.0;    // scd(query, apply_pose(model, pose))
};

// Seeded 3-sample Kabsch trials with inlier counting, refined by Kabsch over
// the winning inlier set. Per-iteration random streams derive from
// (seed, iteration), so parallel and serial runs agree bit for bit.
RegistrationResult ransac_register(const PointCloud& query, const PointCloud& model,
                                   std::span<const Correspondence> correspondences,
                                   const RansacParams& params = {});

}  // namespace retreg
