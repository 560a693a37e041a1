#pragma once

#include <Eigen/Dense>

#include "retreg/core/errors.hpp"
#include "retreg/features/feature_set.hpp"

namespace retreg {

enum class EmbeddingSource { pooled, external };

// Fixed-length global shape descriptor, unit L2 length.
class Embedding {
 public:
  Embedding(Eigen::VectorXf vector, EmbeddingSource source);

  int dim() const { return static_cast<int>(vector_.size()); }
  const Eigen::VectorXf& vector() const { return vector_; }
  EmbeddingSource source() const { return source_; }

 private:
  Eigen::VectorXf vector_;
  EmbeddingSource source_;
};

inline constexpr int kDefaultEmbeddingDim = 256;

// Deterministic classical surrogate for a learned global descriptor:
// per-dimension mean and max over the rows, concatenated, sized to `dim`,
// then L2-normalized. Permutation-invariant over rows.
Embedding pooled_embedding(const FeatureSet& features, int dim = kDefaultEmbeddingDim);

// L2 distance, accumulated in double.
double embedding_distance(const Embedding& a, const Embedding& b);

}  // namespace retreg
