#pragma once

#include <string>

#include "retreg/features/feature_set.hpp"

namespace retreg {

// CRSF binary feature file: magic "CRSF", u32 version (=1), u32 point count,
// u32 feature dim, then count*dim little-endian f32, row-major. Used for both
// per-point features and stacked global embeddings.

void write_crsf(const std::string& path, const FeatureSet::Matrix& rows);

// Raw read; validates magic/version/shape and finiteness.
FeatureSet::Matrix read_crsf(const std::string& path);

// Reads a per-point feature file and checks it against the owning cloud.
// Rows are re-normalized if any deviates from unit length.
FeatureSet load_features(const std::string& path, int expected_points);

void write_features(const std::string& path, const FeatureSet& features);

}  // namespace retreg
