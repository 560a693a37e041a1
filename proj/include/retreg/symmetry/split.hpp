#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

// Partition of a cloud into G symmetry classes. Class labels are 0-based;
// every class of a valid split is non-empty.
struct SymmetrySplit {
  std::vector<int> assignment;   // per-point class in [0, classes)
  int classes = 0;               // G
  Eigen::Matrix3Xd centroids;    // one column per class; Voronoi generators
  double evenness = 0.0;         // population stddev of the class sizes
};

struct SplitParams {
  int n_samples = 20;
  int k_neighbors = 0;  // 0 selects max(32, N/20)
  uint64_t seed = 0;
};

// Symmetry-aided segmentation: sample points, cluster the 3D coordinates of
// each sample's feature-space neighbors into G groups, extend each candidate
// to the full cloud by nearest centroid, and keep the most even split
// (smallest part-size stddev; ties go to the earliest sample).
SymmetrySplit symmetry_split(const PointCloud& cloud, const FeatureSet& features, int g,
                             const SplitParams& params = {});

// Recomputes the part-size stddev from an assignment.
double split_evenness(const std::vector<int>& assignment, int classes);

}  // namespace retreg
