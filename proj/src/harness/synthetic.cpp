#include "retreg/harness/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "retreg/core/rng.hpp"

namespace retreg {

namespace {

// Axis-aligned box shell. Faces lying on a symmetry plane are interior
// cross-sections of the full shape, not surface; they carry no samples
// (points exactly on the plane would coincide with their own mirror copy).
struct Box {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
  bool skip_x_lo = false;
  bool skip_y_lo = false;

  double face_area(int face) const {
    const Eigen::Vector3d e = hi - lo;
    switch (face) {
      case 0: return e.x() * e.y();                      // z = lo
      case 1: return e.x() * e.y();                      // z = hi
      case 2: return skip_x_lo ? 0.0 : e.y() * e.z();    // x = lo
      case 3: return e.y() * e.z();                      // x = hi
      case 4: return skip_y_lo ? 0.0 : e.x() * e.z();    // y = lo
      default: return e.x() * e.z();                     // y = hi
    }
  }

  double area() const {
    double total = 0.0;
    for (int f = 0; f < 6; ++f) total += face_area(f);
    return total;
  }
};

double param(const std::map<std::string, double>& overrides, const std::string& name,
             double fallback) {
  const auto it = overrides.find(name);
  return it == overrides.end() ? fallback : it->second;
}

// Uniform point on the box shell: face by area, then uniform in the face.
Eigen::Vector3d sample_box_surface(const Box& box, SplitMix64& rng) {
  const Eigen::Vector3d e = box.hi - box.lo;
  double pick = uniform_unit(rng) * box.area();
  int face = 0;
  while (face < 5 && pick >= box.face_area(face)) pick -= box.face_area(face++);

  const double u = uniform_unit(rng);
  const double v = uniform_unit(rng);
  switch (face) {
    case 0: return {box.lo.x() + u * e.x(), box.lo.y() + v * e.y(), box.lo.z()};
    case 1: return {box.lo.x() + u * e.x(), box.lo.y() + v * e.y(), box.hi.z()};
    case 2: return {box.lo.x(), box.lo.y() + u * e.y(), box.lo.z() + v * e.z()};
    case 3: return {box.hi.x(), box.lo.y() + u * e.y(), box.lo.z() + v * e.z()};
    case 4: return {box.lo.x() + u * e.x(), box.lo.y(), box.lo.z() + v * e.z()};
    default: return {box.lo.x() + u * e.x(), box.hi.y(), box.lo.z() + v * e.z()};
  }
}

std::vector<Box> fundamental_domain(const SyntheticSpec& spec) {
  const auto& o = spec.shape_params;
  std::vector<Box> boxes;
  switch (spec.family) {
    case ShapeFamily::chair_like: {
      const double w = param(o, "width", 0.8);
      const double d = param(o, "depth", 0.8);
      const double sh = param(o, "seat_height", 0.45);
      const double st = param(o, "seat_thickness", 0.08);
      const double bh = param(o, "back_height", 0.5);
      const double bt = param(o, "back_thickness", 0.06);
      const double lt = param(o, "leg_thickness", 0.07);
      boxes.push_back({{0.0, -d / 2, sh - st}, {w / 2, d / 2, sh}, true, false});    // half seat
      boxes.push_back({{0.0, d / 2 - bt, sh}, {w / 2, d / 2, sh + bh}, true, false});  // half back
      boxes.push_back({{w / 2 - lt, -d / 2, 0.0}, {w / 2, -d / 2 + lt, sh - st}});   // front leg
      boxes.push_back({{w / 2 - lt, d / 2 - lt, 0.0}, {w / 2, d / 2, sh - st}});     // back leg
      break;
    }
    case ShapeFamily::table_like: {
      const double w = param(o, "width", 1.2);
      const double d = param(o, "depth", 0.9);
      const double h = param(o, "height", 0.7);
      const double tt = param(o, "top_thickness", 0.07);
      const double lt = param(o, "leg_thickness", 0.08);
      const double li = param(o, "leg_inset", 0.05);
      boxes.push_back({{0.0, 0.0, h - tt}, {w / 2, d / 2, h}, true, true});  // quarter top
      boxes.push_back(
          {{w / 2 - li - lt, d / 2 - li - lt, 0.0}, {w / 2 - li, d / 2 - li, h - tt}});  // leg
      break;
    }
    case ShapeFamily::box: {
      const double w = param(o, "width", 1.0);
      const double d = param(o, "depth", 0.7);
      const double h = param(o, "height", 0.4);
      // Sampled on the full shell, then folded into the fundamental wedge.
      boxes.push_back({{-w / 2, -d / 2, 0.0}, {w / 2, d / 2, h}});
      break;
    }
  }
  return boxes;
}

void validate_spec(const SyntheticSpec& spec) {
  if (spec.points < 1) fail(Errc::invalid_argument, "points must be >= 1");
  if (spec.noise_sigma < 0.0) fail(Errc::invalid_argument, "noise_sigma must be >= 0");
  if (spec.feature_noise < 0.0) fail(Errc::invalid_argument, "feature_noise must be >= 0");
  if (spec.occlusion_fraction < 0.0 || spec.occlusion_fraction >= 1.0) {
    fail(Errc::invalid_argument, "occlusion_fraction must be in [0, 1)");
  }
  const int g = spec.symmetry_classes;
  switch (spec.family) {
    case ShapeFamily::chair_like:
      if (g != 2) fail(Errc::invalid_argument, "chair_like requires symmetry_classes = 2");
      break;
    case ShapeFamily::table_like:
      if (g != 4) fail(Errc::invalid_argument, "table_like requires symmetry_classes = 4");
      break;
    case ShapeFamily::box:
      if (g != 2 && g != 4) fail(Errc::invalid_argument, "box requires symmetry_classes in {2, 4}");
      break;
  }
}

SymmetrySplit make_split(const Eigen::Matrix3Xd& points, std::vector<int> labels, int g) {
  SymmetrySplit split;
  split.classes = g;
  split.centroids = Eigen::Matrix3Xd::Zero(3, g);
  std::vector<int> counts(g, 0);
  for (int i = 0; i < points.cols(); ++i) {
    split.centroids.col(labels[i]) += points.col(i);
    ++counts[labels[i]];
  }
  for (int c = 0; c < g; ++c) {
    if (counts[c] > 0) split.centroids.col(c) /= static_cast<double>(counts[c]);
  }
  split.evenness = split_evenness(labels, g);
  split.assignment = std::move(labels);
  return split;
}

}  // namespace

ShapeFamily shape_family_from_string(const std::string& name) {
  if (name == "chair_like") return ShapeFamily::chair_like;
  if (name == "table_like") return ShapeFamily::table_like;
  if (name == "box") return ShapeFamily::box;
  fail(Errc::invalid_argument, "unknown shape family '" + name + "'");
}

std::string to_string(ShapeFamily family) {
  switch (family) {
    case ShapeFamily::chair_like: return "chair_like";
    case ShapeFamily::table_like: return "table_like";
    case ShapeFamily::box: return "box";
  }
  return "unknown";
}

FeatureSet symmetric_invariant_features(const Eigen::Matrix3Xd& canonical_points, int g,
                                        const Eigen::Matrix3Xd* invariant_noise) {
  if (g != 2 && g != 4) fail(Errc::invalid_argument, "invariant features support g in {2, 4}");
  const int n = static_cast<int>(canonical_points.cols());
  if (invariant_noise && invariant_noise->cols() != n) {
    fail(Errc::count_mismatch, "invariant noise/point count mismatch");
  }
  FeatureSet::Matrix rows(n, 8);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = canonical_points.col(i);
    double a = std::abs(p.x());
    double b = g == 4 ? std::abs(p.y()) : p.y();
    double c = p.z();
    if (invariant_noise) {
      a += (*invariant_noise)(0, i);
      b += (*invariant_noise)(1, i);
      c += (*invariant_noise)(2, i);
    }
    double v[8] = {a, b, c, 0.5, a * a, b * b, c * c, a * b};
    double norm_sq = 0.0;
    for (double x : v) norm_sq += x * x;
    const double norm = std::sqrt(norm_sq);
    for (int k = 0; k < 8; ++k) rows(i, k) = static_cast<float>(v[k] / norm);
  }
  return FeatureSet(std::move(rows), FeatureSource::external);
}

SyntheticInstance generate_synthetic(const SyntheticSpec& spec) {
  validate_spec(spec);
  const int g = spec.symmetry_classes;
  const int base_count = std::max(1, spec.points / g);

  // Fundamental-domain samples, area-weighted across components.
  const std::vector<Box> boxes = fundamental_domain(spec);
  double total_area = 0.0;
  for (const Box& b : boxes) total_area += b.area();

  SplitMix64 shape_rng(mix_seed(spec.seed, 0x01));
  Eigen::Matrix3Xd base(3, base_count);
  for (int i = 0; i < base_count; ++i) {
    double pick = uniform_unit(shape_rng) * total_area;
    size_t bi = 0;
    while (bi + 1 < boxes.size() && pick >= boxes[bi].area()) {
      pick -= boxes[bi].area();
      ++bi;
    }
    Eigen::Vector3d p = sample_box_surface(boxes[bi], shape_rng);
    if (spec.family == ShapeFamily::box) {
      p.x() = std::abs(p.x());  // fold the full shell into the fundamental wedge
      if (g == 4) p.y() = std::abs(p.y());
    }
    base.col(i) = p;
  }

  // Replicate across the symmetry classes: reflections of the fundamental
  // domain across x = 0 (and y = 0 when G = 4).
  const int n_total = base_count * g;
  Eigen::Matrix3Xd canonical(3, n_total);
  std::vector<int> labels(n_total);
  for (int c = 0; c < g; ++c) {
    const double sx = (c & 1) ? -1.0 : 1.0;
    const double sy = (g == 4 && (c & 2)) ? -1.0 : 1.0;
    for (int i = 0; i < base_count; ++i) {
      const Eigen::Vector3d p = base.col(i);
      canonical.col(c * base_count + i) = Eigen::Vector3d(sx * p.x(), sy * p.y(), p.z());
      labels[c * base_count + i] = c;
    }
  }

  // Center and scale to unit bounding diameter. Components along symmetry
  // planes are zeroed, not estimated, so mirror partners stay exact.
  Eigen::Vector3d centroid = canonical.rowwise().mean();
  centroid.x() = 0.0;
  if (g == 4) centroid.y() = 0.0;
  canonical.colwise() -= centroid;
  const double radius = canonical.colwise().norm().maxCoeff();
  if (radius > 1e-12) canonical *= 1.0 / (2.0 * radius);

  // Per-base-point invariant noise, shared across replicas; independent
  // draws for the model and the observation emulate two noisy encodings of
  // the same shape.
  const auto draw_invariant_noise = [&](uint64_t stream) {
    Eigen::Matrix3Xd noise = Eigen::Matrix3Xd::Zero(3, base_count);
    if (spec.feature_noise > 0.0) {
      SplitMix64 rng(mix_seed(spec.seed, stream));
      for (int i = 0; i < base_count; ++i) {
        for (int k = 0; k < 3; ++k) noise(k, i) = spec.feature_noise * gaussian(rng);
      }
    }
    return noise;
  };

  PointCloud model(canonical, "model");
  SymmetrySplit model_split = make_split(canonical, labels, g);
  const Eigen::Matrix3Xd model_noise_base = draw_invariant_noise(0x06);
  Eigen::Matrix3Xd model_noise(3, n_total);
  for (int j = 0; j < n_total; ++j) model_noise.col(j) = model_noise_base.col(j % base_count);
  FeatureSet model_features = symmetric_invariant_features(canonical, g, &model_noise);

  // Observation pipeline: noise, half-space occlusion, random rotation.
  Eigen::Matrix3Xd noised = canonical;
  if (spec.noise_sigma > 0.0) {
    SplitMix64 noise_rng(mix_seed(spec.seed, 0x02));
    for (int i = 0; i < n_total; ++i) {
      for (int k = 0; k < 3; ++k) noised(k, i) += spec.noise_sigma * gaussian(noise_rng);
    }
  }

  std::vector<int> kept(n_total);
  std::iota(kept.begin(), kept.end(), 0);
  if (spec.occlusion_fraction > 0.0) {
    SplitMix64 cut_rng(mix_seed(spec.seed, 0x03));
    Eigen::Vector3d direction(gaussian(cut_rng), gaussian(cut_rng), gaussian(cut_rng));
    if (direction.norm() < 1e-12) direction = Eigen::Vector3d::UnitX();
    direction.normalize();

    const int remove = static_cast<int>(std::lround(spec.occlusion_fraction * n_total));
    std::vector<std::pair<double, int>> depth(n_total);
    for (int i = 0; i < n_total; ++i) depth[i] = {direction.dot(noised.col(i)), i};
    std::sort(depth.begin(), depth.end());
    kept.clear();
    for (int i = 0; i < n_total - remove; ++i) kept.push_back(depth[i].second);
    std::sort(kept.begin(), kept.end());
    if (static_cast<int>(kept.size()) < 50) fail(Errc::over_occluded, "over-occluded");
  }

  SplitMix64 rot_rng(mix_seed(spec.seed, 0x04));
  const Eigen::Matrix3d rotation = random_rotation(rot_rng);
  const Pose gt_pose(rotation, Eigen::Vector3d::Zero());

  const int n_kept = static_cast<int>(kept.size());
  Eigen::Matrix3Xd observed(3, n_kept);
  Eigen::Matrix3Xd kept_canonical(3, n_kept);
  std::vector<int> kept_labels(n_kept);
  for (int i = 0; i < n_kept; ++i) {
    observed.col(i) = rotation * noised.col(kept[i]);
    kept_canonical.col(i) = canonical.col(kept[i]);
    kept_labels[i] = labels[kept[i]];
  }

  PointCloud cloud(observed, "query");
  SymmetrySplit gt_split = make_split(observed, std::move(kept_labels), g);
  const Eigen::Matrix3Xd query_noise_base = draw_invariant_noise(0x05);
  Eigen::Matrix3Xd query_noise(3, n_kept);
  for (int i = 0; i < n_kept; ++i) query_noise.col(i) = query_noise_base.col(kept[i] % base_count);
  FeatureSet features = symmetric_invariant_features(kept_canonical, g, &query_noise);

  return SyntheticInstance{std::move(cloud),        gt_pose,
                           std::move(gt_split),     std::move(model),
                           std::move(model_split),  std::move(features),
                           std::move(model_features)};
}

}  // namespace retreg
