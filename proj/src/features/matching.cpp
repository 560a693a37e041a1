#include "retreg/features/matching.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

#include "retreg/core/kdtree.hpp"
#include "retreg/core/rng.hpp"

namespace retreg {

namespace {

uint64_t pack_pair(int i, int j) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32) | static_cast<uint32_t>(j);
}

}  // namespace

std::vector<Correspondence> extract_pairs(const PointCloud& a, const PointCloud& b, double tau) {
  if (!(tau > 0.0)) fail(Errc::invalid_argument, "pair tolerance must be positive");
  const KdTree3 tree(b.points());
  const int n = a.size();

  std::vector<std::vector<int>> hits(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    hits[i] = tree.radius_indices(a.point(i), tau);
  }

  std::vector<Correspondence> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j : hits[i]) pairs.push_back({i, j});
  }
  return pairs;
}

std::vector<Correspondence> sample_negative_pairs(const PointCloud& a, const PointCloud& b,
                                                  std::span<const Correspondence> positives,
                                                  int count, uint64_t seed, double tau) {
  if (count < 1) fail(Errc::invalid_argument, "negative pair count must be >= 1");
  if (!(tau > 0.0)) fail(Errc::invalid_argument, "pair tolerance must be positive");

  std::unordered_set<uint64_t> positive_keys;
  positive_keys.reserve(positives.size() * 2);
  for (const Correspondence& c : positives) positive_keys.insert(pack_pair(c.query_index, c.model_index));

  const double tau_sq = tau * tau;
  std::vector<uint64_t> candidates;
  for (int i = 0; i < a.size(); ++i) {
    for (int j = 0; j < b.size(); ++j) {
      if (squared_distance(a.point(i), b.point(j)) < tau_sq) continue;
      const uint64_t key = pack_pair(i, j);
      if (positive_keys.count(key)) continue;
      candidates.push_back(key);
    }
  }
  if (candidates.empty() || static_cast<int>(candidates.size()) < count) {
    fail(Errc::no_negatives, "no negatives available");
  }

  SplitMix64 rng(seed);
  const int total = static_cast<int>(candidates.size());
  for (int i = 0; i < count; ++i) {
    const int j = i + uniform_index(rng, total - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());

  std::vector<Correspondence> out;
  out.reserve(count);
  for (uint64_t key : candidates) {
    out.push_back({static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)});
  }
  return out;
}

PairSets build_pair_sets(const PointCloud& a, const PointCloud& b, int negative_count,
                         uint64_t seed, double tau) {
  PairSets sets;
  sets.positives = extract_pairs(a, b, tau);
  sets.negatives = sample_negative_pairs(a, b, sets.positives, negative_count, seed, tau);
  return sets;
}

std::vector<Correspondence> knn_match(const FeatureSet& query_features,
                                      const FeatureSet& model_features, int k) {
  if (query_features.dim() != model_features.dim()) {
    fail(Errc::dim_mismatch, "feature dimension mismatch");
  }
  const int n = query_features.size();
  const int m = model_features.size();
  if (k < 1 || k > m) fail(Errc::invalid_argument, "k must be within [1, model point count]");

  const FeatureSet::Matrix& q = query_features.matrix();
  const FeatureSet::Matrix& f = model_features.matrix();
  std::vector<Correspondence> out(static_cast<size_t>(n) * k);

#pragma omp parallel
  {
    std::vector<std::pair<double, int>> dist(m);
#pragma omp for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) dist[j] = {feature_squared_distance(q, i, f, j), j};
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      for (int r = 0; r < k; ++r) out[static_cast<size_t>(i) * k + r] = {i, dist[r].second};
    }
  }
  return out;
}

}  // namespace retreg
