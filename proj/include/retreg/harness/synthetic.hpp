#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"
#include "retreg/geometry/pose.hpp"
#include "retreg/symmetry/split.hpp"

namespace retreg {

enum class ShapeFamily { chair_like, table_like, box };

ShapeFamily shape_family_from_string(const std::string& name);
std::string to_string(ShapeFamily family);

struct SyntheticSpec {
  ShapeFamily family = ShapeFamily::chair_like;
  int symmetry_classes = 2;                    // G; fixed per family (box allows 2 or 4)
  std::map<std::string, double> shape_params;  // overrides of the family defaults
  int points = 1024;
  double noise_sigma = 0.0;
  double occlusion_fraction = 0.0;  // removed by a seeded half-space cut
  // Descriptor perturbation, drawn once per fundamental-domain point and
  // copied to every symmetry replica: features stay exactly symmetric while
  // cross-instance matching turns ambiguous, like learned features.
  double feature_noise = 0.0;
  uint64_t seed = 0;
};

struct SyntheticInstance {
  PointCloud cloud;                  // observed query: noised, occluded, rotated
  Pose ground_truth_pose;            // maps canonical coordinates into the cloud frame
  SymmetrySplit ground_truth_split;  // true class labels for the cloud's points
  PointCloud model;                  // canonical complete model (NCC convention)
  SymmetrySplit model_split;
  FeatureSet features;        // mirror-exact descriptors for the cloud's points
  FeatureSet model_features;  // same for the model's points
};

// Builds a cloud by replicating a seeded fundamental domain across the G
// symmetry classes, then noising, occluding, and rotating it. Ground-truth
// pose and per-point class labels come along.
SyntheticInstance generate_synthetic(const SyntheticSpec& spec);

// Idealized rotation-invariant descriptors from canonical coordinates:
// points related by the construction symmetry receive bitwise-equal rows.
// `invariant_noise`, when present, holds one 3-vector per point (mirror
// partners sharing the same vector) added to the invariants before lifting.
FeatureSet symmetric_invariant_features(const Eigen::Matrix3Xd& canonical_points, int g,
                                        const Eigen::Matrix3Xd* invariant_noise = nullptr);

}  // namespace retreg
