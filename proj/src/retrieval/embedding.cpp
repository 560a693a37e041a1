#include "retreg/retrieval/embedding.hpp"

#include <cmath>

namespace retreg {

Embedding::Embedding(Eigen::VectorXf vector, EmbeddingSource source)
    : vector_(std::move(vector)), source_(source) {
  if (vector_.size() < 1) fail(Errc::invalid_argument, "embedding must be non-empty");
  if (!vector_.allFinite()) fail(Errc::non_finite, "non-finite embedding");
  double sum = 0.0;
  for (int i = 0; i < vector_.size(); ++i) {
    sum += static_cast<double>(vector_[i]) * static_cast<double>(vector_[i]);
  }
  if (std::abs(std::sqrt(sum) - 1.0) > 1e-6) {
    fail(Errc::invalid_argument, "embedding is not unit length");
  }
}

Embedding pooled_embedding(const FeatureSet& features, int dim) {
  if (dim < 1) fail(Errc::invalid_argument, "embedding dim must be >= 1");
  const FeatureSet::Matrix& m = features.matrix();
  const int n = features.size();
  const int c = features.dim();

  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(2 * c);
  for (int k = 0; k < c; ++k) {
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double v = static_cast<double>(m(i, k));
      sum += v;
      if (v > best) best = v;
    }
    pooled[k] = sum / static_cast<double>(n);
    pooled[c + k] = best;
  }

  Eigen::VectorXd sized = Eigen::VectorXd::Zero(dim);
  const int keep = std::min<int>(dim, 2 * c);
  sized.head(keep) = pooled.head(keep);

  const double norm = sized.norm();
  if (norm <= 0.0) fail(Errc::degenerate, "pooled embedding collapsed to zero");
  Eigen::VectorXf out(dim);
  for (int i = 0; i < dim; ++i) out[i] = static_cast<float>(sized[i] / norm);
  return Embedding(std::move(out), EmbeddingSource::pooled);
}

double embedding_distance(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) fail(Errc::dim_mismatch, "embedding dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = static_cast<double>(a.vector()[i]) - static_cast<double>(b.vector()[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace retreg
