#pragma once

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

struct FpfhParams {
  double normal_radius = 0.1;   // PCA neighborhood for normals, NCC units
  double feature_radius = 0.2;  // histogram neighborhood, NCC units
};

// Classical 33-dimensional fast point feature histograms: PCA normals
// oriented away from the cloud centroid, 11 bins per angular feature,
// distance-weighted neighbor accumulation, unit-normalized rows. Points with
// fewer than 3 neighborhood members receive the uniform histogram.
FeatureSet extract_fpfh(const PointCloud& cloud, const FpfhParams& params = {});

}  // namespace retreg
