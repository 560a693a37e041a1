#pragma once

#include "retreg/features/feature_set.hpp"
#include "retreg/registration/ransac.hpp"
#include "retreg/symmetry/split.hpp"

namespace retreg {

struct SymmetryRegisterParams {
  int knn_k = 5;
  RansacParams ransac;  // the same seed drives every hypothesis
  SplitParams split;
};

// Symmetry-aware registration: split both clouds into g symmetry classes,
// run RANSAC once per class mapping plus once unconstrained as a back-up,
// and return the hypothesis with the smallest single-direction Chamfer
// distance. g = 1 degrades to plain kNN matching + RANSAC.
RegistrationResult symmetry_aware_register(const PointCloud& query,
                                           const FeatureSet& query_features,
                                           const PointCloud& model,
                                           const FeatureSet& model_features, int g,
                                           const SymmetryRegisterParams& params = {});

}  // namespace retreg
