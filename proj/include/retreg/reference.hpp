#pragma once

#include <span>
#include <vector>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/distances.hpp"
#include "retreg/geometry/point_cloud.hpp"

// Serial reference kernels: plain O(N*M) double loops with no spatial index
// and no threading. Kept for testing and benchmarking; the accelerated
// kernels must reproduce these results bit for bit.
namespace retreg::reference {

double scd(const PointCloud& source, const PointCloud& target);

double chamfer(const PointCloud& a, const PointCloud& b);

SimilarityMatrix similarity_matrix(std::span<const PointCloud> models);

std::vector<Correspondence> extract_pairs(const PointCloud& a, const PointCloud& b, double tau);

std::vector<Correspondence> knn_match(const FeatureSet& query_features,
                                      const FeatureSet& model_features, int k);

}  // namespace retreg::reference
