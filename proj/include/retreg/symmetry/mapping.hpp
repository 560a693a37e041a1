#pragma once

#include <string>
#include <vector>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"
#include "retreg/symmetry/split.hpp"

namespace retreg {

// Bijection from query symmetry classes onto model symmetry classes.
struct ClassMapping {
  std::vector<int> permutation;  // permutation[c] = model class for query class c
};

// All g! class permutations in lexicographic order; g in [2, 4].
std::vector<ClassMapping> enumerate_mappings(int g);

std::string mapping_label(const ClassMapping& mapping);

// Per-class kNN matching: each query point in class c draws its k nearest
// descriptors from model points in class mapping(c). Classes with fewer than
// k model points yield all available.
std::vector<Correspondence> constrained_match(const FeatureSet& query_features,
                                              const FeatureSet& model_features,
                                              const SymmetrySplit& query_split,
                                              const SymmetrySplit& model_split,
                                              const ClassMapping& mapping, int k);

}  // namespace retreg
