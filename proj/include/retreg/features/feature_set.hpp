#pragma once

#include <Eigen/Dense>

#include "retreg/core/errors.hpp"

namespace retreg {

enum class FeatureSource { fpfh, external };

// Per-point local descriptors, one row per point. Rows are unit L2 length;
// storage is 32-bit to match the on-disk feature format.
class FeatureSet {
 public:
  using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FeatureSet(Matrix features, FeatureSource source);

  // Normalizes every row to unit length (double accumulation), then builds
  // the set. Zero rows are rejected.
  static FeatureSet from_unnormalized(Matrix features, FeatureSource source);

  int size() const { return static_cast<int>(features_.rows()); }
  int dim() const { return static_cast<int>(features_.cols()); }
  const Matrix& matrix() const { return features_; }
  FeatureSource source() const { return source_; }

 private:
  Matrix features_;
  FeatureSource source_;
};

// Squared L2 distance between two descriptor rows, accumulated in double.
// Shared by the parallel matcher and the serial reference so rankings agree
// exactly.
inline double feature_squared_distance(const FeatureSet::Matrix& a, int row_a,
                                       const FeatureSet::Matrix& b, int row_b) {
  const int c = static_cast<int>(a.cols());
  double sum = 0.0;
  for (int k = 0; k < c; ++k) {
    const double d = static_cast<double>(a(row_a, k)) - static_cast<double>(b(row_b, k));
    sum += d * d;
  }
  return sum;
}

}  // namespace retreg
