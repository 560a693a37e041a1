#include "retreg/features/feature_set.hpp"

#include <cmath>

namespace retreg {

namespace {

double row_norm(const FeatureSet::Matrix& m, int row) {
  double sum = 0.0;
  for (int k = 0; k < m.cols(); ++k) {
    const double v = static_cast<double>(m(row, k));
    sum += v * v;
  }
  return std::sqrt(sum);
}

}  // namespace

FeatureSet::FeatureSet(Matrix features, FeatureSource source)
    : features_(std::move(features)), source_(source) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    fail(Errc::invalid_argument, "feature matrix must be non-empty");
  }
  if (!features_.allFinite()) fail(Errc::non_finite, "non-finite feature");
  for (int i = 0; i < features_.rows(); ++i) {
    if (std::abs(row_norm(features_, i) - 1.0) > 1e-6) {
      fail(Errc::invalid_argument, "feature row is not unit length");
    }
  }
}

FeatureSet FeatureSet::from_unnormalized(Matrix features, FeatureSource source) {
  if (features.rows() < 1 || features.cols() < 1) {
    fail(Errc::invalid_argument, "feature matrix must be non-empty");
  }
  if (!features.allFinite()) fail(Errc::non_finite, "non-finite feature");
  for (int i = 0; i < features.rows(); ++i) {
    const double norm = row_norm(features, i);
    if (norm <= 0.0) fail(Errc::invalid_argument, "zero feature row cannot be normalized");
    for (int k = 0; k < features.cols(); ++k) {
      features(i, k) = static_cast<float>(static_cast<double>(features(i, k)) / norm);
    }
  }
  return FeatureSet(std::move(features), source);
}

}  // namespace retreg
