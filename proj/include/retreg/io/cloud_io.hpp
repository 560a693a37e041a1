#pragma once

#include <span>
#include <string>

#include "retreg/geometry/point_cloud.hpp"

namespace retreg {

// ASCII XYZ: one "x y z" triple per line.
PointCloud read_xyz(const std::string& path, std::string id = "");
void write_xyz(const std::string& path, const PointCloud& cloud);

// PLY, ASCII or binary_little_endian; vertex x/y/z as 32- or 64-bit floats.
// Extra vertex properties and non-vertex elements are skipped.
PointCloud read_ply(const std::string& path, std::string id = "");

// Writer emits ASCII PLY with 64-bit floats.
void write_ply(const std::string& path, const PointCloud& cloud);

// Same, with a per-point integer "class" property (symmetry debug output).
void write_ply_with_labels(const std::string& path, const PointCloud& cloud,
                           std::span<const int> labels);

// Dispatch by extension: .xyz or .ply.
PointCloud read_cloud(const std::string& path, std::string id = "");

}  // namespace retreg
