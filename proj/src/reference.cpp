#include "retreg/reference.hpp"

#include <algorithm>

#include "retreg/core/kdtree.hpp"

namespace retreg::reference {

double scd(const PointCloud& source, const PointCloud& target) {
  double sum = 0.0;
  for (int i = 0; i < source.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < target.size(); ++j) {
      const double d2 = squared_distance(source.point(i), target.point(j));
      if (d2 < best) best = d2;
    }
    sum += best;
  }
  return sum;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  return reference::scd(a, b) + reference::scd(b, a);
}

SimilarityMatrix similarity_matrix(std::span<const PointCloud> models) {
  const int n = static_cast<int>(models.size());
  if (n < 2) fail(Errc::invalid_argument, "similarity matrix needs at least 2 models");
  SimilarityMatrix result;
  result.values = Eigen::MatrixXd::Zero(n, n);
  for (const PointCloud& m : models) result.model_ids.push_back(m.id());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = reference::chamfer(models[i], models[j]);
      result.values(i, j) = d;
      result.values(j, i) = d;
    }
  }
  return result;
}

std::vector<Correspondence> extract_pairs(const PointCloud& a, const PointCloud& b, double tau) {
  if (!(tau > 0.0)) fail(Errc::invalid_argument, "pair tolerance must be positive");
  const double tau_sq = tau * tau;
  std::vector<Correspondence> pairs;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) {
      if (squared_distance(a.point(i), b.point(j)) < tau_sq) pairs.push_back({i, j});
    }
  }
  return pairs;
}

std::vector<Correspondence> knn_match(const FeatureSet& query_features,
                                      const FeatureSet& model_features, int k) {
  if (query_features.dim() != model_features.dim()) {
    fail(Errc::dim_mismatch, "feature dimension mismatch");
  }
  const int n = query_features.size();
  const int m = model_features.size();
  if (k < 1 || k > m) fail(Errc::invalid_argument, "k must be within [1, model point count]");

  std::vector<Correspondence> out;
  out.reserve(static_cast<size_t>(n) * k);
  std::vector<std::pair<double, int>> dist(m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      dist[j] = {feature_squared_distance(query_features.matrix(), i, model_features.matrix(), j), j};
    }
    std::sort(dist.begin(), dist.end());
    for (int r = 0; r < k; ++r) out.push_back({i, dist[r].second});
  }
  return out;
}

}  // namespace retreg::reference
