#pragma once

#include <span>
#include <vector>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

// Matching tolerance for point-pair extraction, in normalized canonical
// units (clouds scaled to unit bounding diameter).
inline constexpr double kDefaultPairTolerance = 0.05;

struct PairSets {
  std::vector<Correspondence> positives;
  std::vector<Correspondence> negatives;
};

// All pairs (i, j) with ||a_i - b_j|| < tau, both clouds in a common frame.
// Exact; emitted in (i, j) lexicographic order.
std::vector<Correspondence> extract_pairs(const PointCloud& a, const PointCloud& b, double tau);

// `count` distinct pairs drawn uniformly (seeded) from the pairs at least
// tau apart, excluding `positives`. Errors when no qualifying pair exists or
// fewer than `count` do.
std::vector<Correspondence> sample_negative_pairs(const PointCloud& a, const PointCloud& b,
                                                  std::span<const Correspondence> positives,
                                                  int count, uint64_t seed,
                                                  double tau = kDefaultPairTolerance);

// For each query row, the k model rows with smallest descriptor L2 distance;
// ties break by ascending model index. Output is grouped by query row in
// ascending (distance, index) order, N*k pairs total.
std::vector<Correspondence> knn_match(const FeatureSet& query_features,
                                      const FeatureSet& model_features, int k);

// Positive pairs within tau plus seeded negatives at least tau apart,
// bundled; the two sets are disjoint by construction.
PairSets build_pair_sets(const PointCloud& a, const PointCloud& b, int negative_count,
                         uint64_t seed, double tau = kDefaultPairTolerance);

}  // namespace retreg
