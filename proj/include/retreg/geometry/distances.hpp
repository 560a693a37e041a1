#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "retreg/core/kdtree.hpp"
#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

// Average squared distance between matched points, normalized by the query
// size; query points without a match contribute zero.
double matched_point_distance(const PointCloud& query, const PointCloud& model,
                              std::span<const Correspondence> assoc);

// Single-direction Chamfer distance: sum over source points of the squared
// distance to the nearest target point.
double scd(const PointCloud& source, const KdTree3& target_tree);
double scd(const PointCloud& source, const PointCloud& target);

// Bi-directional Chamfer distance: scd(a, b) + scd(b, a).
double chamfer(const PointCloud& a, const PointCloud& b);

struct SimilarityMatrix {
  Eigen::MatrixXd values;             // pairwise Chamfer distances, zero diagonal
  std::vector<std::string> model_ids;
};

// Pairwise Chamfer distances over a model set. Parallelized over the upper
// triangle; each entry is computed once and mirrored, so the result is
// bit-identical to a sequential evaluation.
SimilarityMatrix similarity_matrix(std::span<const PointCloud> models);

struct SetThresholds {
  double tau_plus = 0.1;     // rank percentile for positives
  double tau_minus = 0.5;    // rank percentile for negatives
  double delta_plus = 0.15;  // absolute Chamfer cutoff for positives
  double delta_minus = 0.20; // absolute Chamfer cutoff for negatives
};

struct PositiveNegativeSets {
  std::vector<std::string> positives;  // ids, ascending rank
  std::vector<std::string> negatives;  // ids, ascending rank
};

// Rank-and-threshold positive/negative sets around an anchor model. Rank is
// 1-based over the non-anchor models ordered by (Chamfer distance, id).
PositiveNegativeSets positive_negative_sets(const SimilarityMatrix& matrix, int anchor,
                                            const SetThresholds& thresholds = {});

}  // namespace retreg
