#include "retreg/registration/symmetry_register.hpp"

#include <exception>
#include <optional>
#include <vector>

#include "retreg/core/rng.hpp"
#include "retreg/features/matching.hpp"
#include "retreg/symmetry/mapping.hpp"

namespace retreg {

RegistrationResult symmetry_aware_register(const PointCloud& query,
                                           const FeatureSet& query_features,
                                           const PointCloud& model,
                                           const FeatureSet& model_features, int g,
                                           const SymmetryRegisterParams& params) {
  if (g < 1) fail(Errc::invalid_argument, "symmetry class count must be >= 1");
  if (query_features.size() != query.size() || model_features.size() != model.size()) {
    fail(Errc::count_mismatch, "features/cloud size mismatch");
  }

  const int k = std::min(params.knn_k, model.size());
  const std::vector<Correspondence> unconstrained = knn_match(query_features, model_features, k);

  if (g == 1) {
    return ransac_register(query, model, unconstrained, params.ransac);
  }

  // Split errors propagate; matching and RANSAC failures only disable the
  // affected hypothesis.
  SplitParams query_split_params = params.split;
  query_split_params.seed = mix_seed(params.split.seed, 0x71);
  SplitParams model_split_params = params.split;
  model_split_params.seed = mix_seed(params.split.seed, 0x72);
  const SymmetrySplit query_split = symmetry_split(query, query_features, g, query_split_params);
  const SymmetrySplit model_split = symmetry_split(model, model_features, g, model_split_params);

  const std::vector<ClassMapping> mappings = enumerate_mappings(g);
  const int h = static_cast<int>(mappings.size());

  std::vector<std::optional<RegistrationResult>> hypotheses(h + 1);
  std::vector<std::string> labels(h + 1);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i <= h; ++i) {
    try {
      if (i < h) {
        labels[i] = mapping_label(mappings[i]);
        const std::vector<Correspondence> corrs = constrained_match(
            query_features, model_features, query_split, model_split, mappings[i], k);
        RegistrationResult r = ransac_register(query, model, corrs, params.ransac);
        r.hypothesis_label = labels[i];
        hypotheses[i] = std::move(r);
      } else {
        labels[i] = "unconstrained";
        hypotheses[i] = ransac_register(query, model, unconstrained, params.ransac);
      }
    } catch (const Error&) {
      // hypothesis unavailable
    }
  }

  int best = -1;
  for (int i = 0; i <= h; ++i) {
    if (!hypotheses[i]) continue;
    if (best < 0 || hypotheses[i]->alignment_scd < hypotheses[best]->alignment_scd) best = i;
  }
  if (best < 0) fail(Errc::degenerate, "every registration hypothesis failed");
  return *hypotheses[best];
}

}  // namespace retreg
