#pragma once

#include <algorithm>
#include <cmath>

#include "retreg/geometry/pose.hpp"

namespace retreg {

// Relative rotation error: geodesic angle in [0, pi]. The trace argument is
// clamped so rounding at the boundaries cannot produce NaN.
inline double rre(const Pose& estimated, const Pose& ground_truth) {
  const double trace = (estimated.rotation().transpose() * ground_truth.rotation()).trace();
  const double arg = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(arg);
}

// Relative translation error: Euclidean norm of the translation difference.
inline double rte(const Pose& estimated, const Pose& ground_truth) {
  return (estimated.translation() - ground_truth.translation()).norm();
}

inline double degrees(double radians) { return radians * 180.0 / 3.14159265358979323846; }
inline double radians(double degrees) { return degrees * 3.14159265358979323846 / 180.0; }

}  // namespace retreg
