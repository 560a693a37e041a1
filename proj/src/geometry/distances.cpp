#include "retreg/geometry/distances.hpp"

#include <algorithm>
#include <numeric>

namespace retreg {

double matched_point_distance(const PointCloud& query, const PointCloud& model,
                              std::span<const Correspondence> assoc) {
  double sum = 0.0;
  for (const Correspondence& c : assoc) {
    if (c.query_index < 0 || c.query_index >= query.size() || c.model_index < 0 ||
        c.model_index >= model.size()) {
      fail(Errc::invalid_argument, "correspondence index out of bounds");
    }
    sum += squared_distance(model.point(c.model_index), query.point(c.query_index));
  }
  return sum / static_cast<double>(query.size());
}

double scd(const PointCloud& source, const KdTree3& target_tree) {
  const int n = source.size();
  std::vector<double> nearest(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    nearest[i] = target_tree.nearest_squared(source.point(i));
  }
  // Fixed-order accumulation keeps the result independent of the schedule.
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += nearest[i];
  return sum;
}

double scd(const PointCloud& source, const PointCloud& target) {
  return scd(source, KdTree3(target.points()));
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  return scd(a, b) + scd(b, a);
}

SimilarityMatrix similarity_matrix(std::span<const PointCloud> models) {
  const int n = static_cast<int>(models.size());
  if (n < 2) fail(Errc::invalid_argument, "similarity matrix needs at least 2 models");

  std::vector<KdTree3> trees;
  trees.reserve(n);
  for (const PointCloud& m : models) trees.emplace_back(m.points());

  SimilarityMatrix result;
  result.values = Eigen::MatrixXd::Zero(n, n);
  result.model_ids.reserve(n);
  for (const PointCloud& m : models) result.model_ids.push_back(m.id());

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  const int p = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < p; ++k) {
    const auto [i, j] = pairs[k];
    const double d = scd(models[i], trees[j]) + scd(models[j], trees[i]);
    result.values(i, j) = d;
    result.values(j, i) = d;
  }
  return result;
}

PositiveNegativeSets positive_negative_sets(const SimilarityMatrix& matrix, int anchor,
                                            const SetThresholds& t) {
  const int n = static_cast<int>(matrix.model_ids.size());
  if (anchor < 0 || anchor >= n) fail(Errc::invalid_argument, "anchor index out of bounds");
  if (!(t.tau_plus > 0.0 && t.tau_plus <= t.tau_minus && t.tau_minus <= 1.0)) {
    fail(Errc::invalid_argument, "rank thresholds must satisfy 0 < tau+ <= tau- <= 1");
  }
  if (!(t.delta_plus <= t.delta_minus)) {
    fail(Errc::invalid_argument, "distance thresholds must satisfy delta+ <= delta-");
  }

  // Rank the non-anchor models by (Chamfer distance, id); ties on distance
  // break by ascending id so membership is deterministic.
  std::vector<int> order;
  order.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != anchor) order.push_back(j);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = matrix.values(anchor, a);
    const double db = matrix.values(anchor, b);
    if (da != db) return da < db;
    return matrix.model_ids[a] < matrix.model_ids[b];
  });

  PositiveNegativeSets sets;
  for (size_t r = 0; r < order.size(); ++r) {
    const int j = order[r];
    const double rank = static_cast<double>(r + 1);
    const double d = matrix.values(anchor, j);
    if (rank <= t.tau_plus * n && d <= t.delta_plus) sets.positives.push_back(matrix.model_ids[j]);
    if (rank >= t.tau_minus * n && d >= t.delta_minus) sets.negatives.push_back(matrix.model_ids[j]);
  }
  return sets;
}

}  // namespace retreg
