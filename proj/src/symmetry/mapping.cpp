#include "retreg/symmetry/mapping.hpp"

#include <algorithm>
#include <numeric>

namespace retreg {

std::vector<ClassMapping> enumerate_mappings(int g) {
  if (g < 2 || g > 4) fail(Errc::invalid_argument, "class mappings supported for g in [2, 4]");
  std::vector<int> perm(g);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<ClassMapping> mappings;
  do {
    mappings.push_back({perm});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return mappings;
}

std::string mapping_label(const ClassMapping& mapping) {
  std::string label = "mapping ";
  for (size_t c = 0; c < mapping.permutation.size(); ++c) {
    if (c > 0) label += ",";
    label += std::to_string(c) + ">" + std::to_string(mapping.permutation[c]);
  }
  return label;
}

std::vector<Correspondence> constrained_match(const FeatureSet& query_features,
                                              const FeatureSet& model_features,
                                              const SymmetrySplit& query_split,
                                              const SymmetrySplit& model_split,
                                              const ClassMapping& mapping, int k) {
  if (query_features.dim() != model_features.dim()) {
    fail(Errc::dim_mismatch, "feature dimension mismatch");
  }
  if (query_split.classes != model_split.classes) {
    fail(Errc::invalid_argument, "splits must share the same class count");
  }
  const int g = query_split.classes;
  if (static_cast<int>(mapping.permutation.size()) != g) {
    fail(Errc::invalid_argument, "mapping size does not match class count");
  }
  {
    std::vector<char> seen(g, 0);
    for (int c : mapping.permutation) {
      if (c < 0 || c >= g || seen[c]) fail(Errc::invalid_argument, "mapping is not a permutation");
      seen[c] = 1;
    }
  }
  const int n = query_features.size();
  const int m = model_features.size();
  if (static_cast<int>(query_split.assignment.size()) != n ||
      static_cast<int>(model_split.assignment.size()) != m) {
    fail(Errc::count_mismatch, "split/features size mismatch");
  }
  if (k < 1) fail(Errc::invalid_argument, "k must be >= 1");

  std::vector<std::vector<int>> model_classes(g);
  for (int j = 0; j < m; ++j) model_classes[model_split.assignment[j]].push_back(j);
  if (std::all_of(model_classes.begin(), model_classes.end(),
                  [](const std::vector<int>& v) { return v.empty(); })) {
    fail(Errc::invalid_argument, "all mapped model classes are empty");
  }

  const FeatureSet::Matrix& q = query_features.matrix();
  const FeatureSet::Matrix& f = model_features.matrix();
  std::vector<std::vector<Correspondence>> rows(n);

#pragma omp parallel
  {
    std::vector<std::pair<double, int>> dist;
#pragma omp for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
      const std::vector<int>& pool = model_classes[mapping.permutation[query_split.assignment[i]]];
      if (pool.empty()) continue;
      dist.resize(pool.size());
      for (size_t j = 0; j < pool.size(); ++j) {
        dist[j] = {feature_squared_distance(q, i, f, pool[j]), pool[j]};
      }
      const int take = std::min<int>(k, static_cast<int>(pool.size()));
      std::partial_sort(dist.begin(), dist.begin() + take, dist.end());
      rows[i].reserve(take);
      for (int r = 0; r < take; ++r) rows[i].push_back({i, dist[r].second});
    }
  }

  std::vector<Correspondence> out;
  for (int i = 0; i < n; ++i) out.insert(out.end(), rows[i].begin(), rows[i].end());
  return out;
}

}  // namespace retreg
