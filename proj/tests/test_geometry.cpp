#include <doctest.h>

#include <algorithm>

#include "retreg/geometry/distances.hpp"
#include "retreg/geometry/pose.hpp"
#include "retreg/reference.hpp"
#include "retreg/registration/metrics.hpp"
#include "test_helpers.hpp"

using namespace retreg;
using namespace retreg::testing;

TEST_CASE("point cloud construction enforces invariants") {
  CHECK_THROWS_AS(PointCloud(Eigen::Matrix3Xd(3, 0)), Error);
  Eigen::Matrix3Xd bad(3, 1);
  bad.col(0) = Eigen::Vector3d(0.0, std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(PointCloud(std::move(bad)), Error);

  try {
    PointCloud(Eigen::Matrix3Xd(3, 0), "chair_7");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_cloud);
    CHECK(std::string(e.what()).find("chair_7") != std::string::npos);
  }
}

TEST_CASE("pose construction validates rotation and scale") {
  CHECK_THROWS_AS(Pose(2.0 * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()), Error);
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(0, 0) = -1.0;
  CHECK_THROWS_AS(Pose(reflection, Eigen::Vector3d::Zero()), Error);
  CHECK_THROWS_AS(Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), 0.0), Error);
  CHECK_THROWS_AS(Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), -1.0), Error);
}

TEST_CASE("apply_pose examples") {
  const PointCloud cloud = random_cloud(17, 11);

  const PointCloud same = apply_pose(cloud, Pose());
  CHECK((same.points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);

  const PointCloud origin = cloud_from({{0.0, 0.0, 0.0}});
  const PointCloud shifted =
      apply_pose(origin, Pose(Eigen::Matrix3d::Identity(), {1.0, 0.0, 0.0}));
  CHECK(shifted.point(0) == Eigen::Vector3d(1.0, 0.0, 0.0));

  const PointCloud unit_x = cloud_from({{1.0, 0.0, 0.0}});
  const PointCloud rotated = apply_pose(unit_x, Pose(rot_z(radians(90.0)), Eigen::Vector3d::Zero()));
  CHECK((rotated.point(0) - Eigen::Vector3d(0.0, 1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("to_ncc examples and round-trip oracle") {
  const PointCloud c = cloud_from({{3.0, 1.0, 1.0}});
  const Pose pose(Eigen::Matrix3d::Identity(), {1.0, 1.0, 1.0}, 2.0);
  CHECK((to_ncc(c, pose).point(0) - Eigen::Vector3d(1.0, 0.0, 0.0)).norm() == 0.0);

  const PointCloud cloud = random_cloud(33, 5);
  CHECK((to_ncc(cloud, Pose()).points() - cloud.points()).cwiseAbs().maxCoeff() == 0.0);

  for (uint64_t seed = 0; seed < 100; ++seed) {
    const PointCloud original = random_cloud(24, mix_seed(900, seed));
    const Pose p = random_pose(mix_seed(901, seed));
    const PointCloud round_trip = to_ncc(apply_pose(original, p), p);
    CHECK((round_trip.points() - original.points()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("matched_point_distance examples") {
  const PointCloud x = cloud_from({{0.0, 0.0, 0.0}});
  const PointCloud y = cloud_from({{1.0, 0.0, 0.0}});
  const std::vector<Correspondence> assoc{{0, 0}};
  CHECK(matched_point_distance(x, y, assoc) == 1.0);

  const PointCloud c = random_cloud(9, 77);
  std::vector<Correspondence> identity;
  for (int i = 0; i < c.size(); ++i) identity.push_back({i, i});
  CHECK(matched_point_distance(c, c, identity) == 0.0);

  CHECK(matched_point_distance(c, c, {}) == 0.0);  // everything unmatched

  // Partial association against a hand-computed sum.
  const PointCloud q = cloud_from({{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}});
  const PointCloud mdl = cloud_from({{0.0, 0.0, 1.0}, {1.0, 1.0, 0.0}, {0.0, 0.0, 0.0}});
  const std::vector<Correspondence> partial{{0, 2}, {2, 1}};
  const double expected = (0.0 + (1.0 + 1.0 + 0.0)) / 3.0;  // ||q0-m2||^2 + ||q2-m1||^2 over N=3
  CHECK(matched_point_distance(q, mdl, partial) == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(matched_point_distance(x, y, std::vector<Correspondence>{{0, 5}}), Error);
}

TEST_CASE("scd examples and brute-force oracle") {
  const PointCloud c = random_cloud(40, 3);
  CHECK(scd(c, c) == 0.0);

  const PointCloud single = cloud_from({{0.0, 0.0, 0.0}});
  const PointCloud two = cloud_from({{1.0, 0.0, 0.0}, {5.0, 0.0, 0.0}});
  CHECK(scd(single, two) == 1.0);

  for (uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud a = random_cloud(50, mix_seed(40, seed));
    const PointCloud b = random_cloud(37, mix_seed(41, seed));
    CHECK(scd(a, b) == reference::scd(a, b));  // exact, not approximate
  }
}

TEST_CASE("scd vanishes exactly when every source point coincides with a target point") {
  const PointCloud full = random_cloud(30, 310, 0.5);
  Eigen::Matrix3Xd half = full.points().leftCols(15);
  const PointCloud subset(std::move(half), "subset");
  CHECK(scd(subset, full) == 0.0);

  Eigen::Matrix3Xd shifted = subset.points();
  shifted.col(3) += Eigen::Vector3d(0.01, 0.0, 0.0);
  CHECK(scd(PointCloud(std::move(shifted)), full) > 0.0);
}

TEST_CASE("chamfer symmetry and oracle") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud a = random_cloud(20, mix_seed(50, seed));
    const PointCloud b = random_cloud(20, mix_seed(51, seed));
    CHECK(chamfer(a, b) == chamfer(b, a));
    CHECK(chamfer(a, b) == reference::chamfer(a, b));
  }
  const PointCloud c = random_cloud(25, 99);
  CHECK(chamfer(c, c) == 0.0);
}

TEST_CASE("chamfer is invariant under a common rigid transform") {
  const PointCloud a = random_cloud(30, 61);
  const PointCloud b = random_cloud(28, 62);
  const double base = chamfer(a, b);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Pose p = random_pose(mix_seed(63, seed));
    p = Pose(p.rotation(), p.translation(), 1.0);  // rigid, no scale
    CHECK(chamfer(apply_pose(a, p), apply_pose(b, p)) == doctest::Approx(base).epsilon(1e-6));
  }
}

TEST_CASE("similarity matrix matches pairwise chamfer and the serial reference") {
  std::vector<PointCloud> identical{random_cloud(15, 7, 1.0, "a"), random_cloud(15, 7, 1.0, "b")};
  const SimilarityMatrix zeros = similarity_matrix(identical);
  CHECK(zeros.values.cwiseAbs().maxCoeff() == 0.0);

  std::vector<PointCloud> models;
  for (int i = 0; i < 5; ++i) {
    models.push_back(random_cloud(22, mix_seed(70, i), 1.0, "m" + std::to_string(i)));
  }
  const SimilarityMatrix d = similarity_matrix(models);
  const SimilarityMatrix ref = reference::similarity_matrix(models);
  CHECK(d.values == ref.values);  // parallel result is bit-identical to serial
  CHECK(d.model_ids == ref.model_ids);

  for (int i = 0; i < 5; ++i) {
    CHECK(d.values(i, i) == 0.0);
    for (int j = 0; j < 5; ++j) {
      CHECK(d.values(i, j) == d.values(j, i));
      if (i != j) CHECK(d.values(i, j) == chamfer(models[i], models[j]));
    }
  }

  CHECK_THROWS_AS(similarity_matrix(std::span<const PointCloud>(models.data(), 1)), Error);
}

namespace {

// Brute-force sort-and-filter oracle for the positive/negative sets.
PositiveNegativeSets sets_oracle(const SimilarityMatrix& m, int anchor, const SetThresholds& t) {
  const int n = static_cast<int>(m.model_ids.size());
  std::vector<int> order;
  for (int j = 0; j < n; ++j)
    if (j != anchor) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (m.values(anchor, a) != m.values(anchor, b)) return m.values(anchor, a) < m.values(anchor, b);
    return m.model_ids[a] < m.model_ids[b];
  });
  PositiveNegativeSets out;
  for (size_t r = 0; r < order.size(); ++r) {
    const double rank = static_cast<double>(r + 1);
    const double d = m.values(anchor, order[r]);
    if (rank <= t.tau_plus * n && d <= t.delta_plus) out.positives.push_back(m.model_ids[order[r]]);
    if (rank >= t.tau_minus * n && d >= t.delta_minus) out.negatives.push_back(m.model_ids[order[r]]);
  }
  return out;
}

// Synthetic family with a monotone deformation parameter.
std::vector<PointCloud> monotone_family(int count, int points) {
  std::vector<PointCloud> models;
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng(4242);  // same base shape, deformed per model
    Eigen::Matrix3Xd pts(3, points);
    const double stretch = 1.0 + 0.15 * i;
    for (int p = 0; p < points; ++p) {
      pts.col(p) = Eigen::Vector3d(stretch * uniform_in(rng, -0.5, 0.5),
                                   uniform_in(rng, -0.5, 0.5), uniform_in(rng, -0.5, 0.5));
    }
    models.push_back(PointCloud(std::move(pts), "fam" + std::to_string(i)));
  }
  return models;
}

}  // namespace

TEST_CASE("positive/negative sets: trivial cases") {
  // Identical copies: every rank-qualifying model is positive at delta+ > 0.
  std::vector<PointCloud> copies;
  for (int i = 0; i < 10; ++i) copies.push_back(random_cloud(12, 5, 1.0, "c" + std::to_string(i)));
  const SimilarityMatrix m = similarity_matrix(copies);

  SetThresholds t;
  t.tau_plus = 0.3;
  const PositiveNegativeSets sets = positive_negative_sets(m, 0, t);
  CHECK(sets.positives.size() == 3);  // rank <= 0.3 * 10
  for (const auto& id : sets.positives) CHECK(id != "c0");

  // Vacuous threshold: delta+ = 0 with all CD > 0 gives an empty positive set.
  std::vector<PointCloud> distinct;
  for (int i = 0; i < 6; ++i) {
    distinct.push_back(random_cloud(12, mix_seed(80, i), 1.0, "d" + std::to_string(i)));
  }
  const SimilarityMatrix dm = similarity_matrix(distinct);
  SetThresholds zero;
  zero.delta_plus = 0.0;
  zero.delta_minus = 0.0;
  CHECK(positive_negative_sets(dm, 2, zero).positives.empty());
}

TEST_CASE("positive/negative sets match the brute-force oracle on a monotone family") {
  const auto models = monotone_family(10, 30);
  const SimilarityMatrix m = similarity_matrix(models);
  SetThresholds t;
  t.tau_plus = 0.2;
  t.tau_minus = 0.5;
  t.delta_plus = 0.5 * m.values.maxCoeff();  // mid-range: both sets stay populated
  t.delta_minus = t.delta_plus;
  for (int anchor = 0; anchor < 10; ++anchor) {
    const auto got = positive_negative_sets(m, anchor, t);
    const auto expected = sets_oracle(m, anchor, t);
    CHECK(got.positives == expected.positives);
    CHECK(got.negatives == expected.negatives);
  }
}

TEST_CASE("positive/negative sets are disjoint under ordered thresholds") {
  const auto models = monotone_family(8, 25);
  const SimilarityMatrix m = similarity_matrix(models);
  SetThresholds t;  // tau+ 0.1 < tau- 0.5, delta+ 0.15 < delta- 0.20
  t.delta_plus = 1e9;
  t.delta_minus = 1e9 + 1;
  const auto sets = positive_negative_sets(m, 3, t);
  for (const auto& p : sets.positives) {
    CHECK(std::find(sets.negatives.begin(), sets.negatives.end(), p) == sets.negatives.end());
  }
}

TEST_CASE("positive/negative sets reject invalid thresholds") {
  const auto models = monotone_family(4, 10);
  const SimilarityMatrix m = similarity_matrix(models);
  SetThresholds bad;
  bad.tau_plus = 0.8;
  bad.tau_minus = 0.2;
  CHECK_THROWS_AS(positive_negative_sets(m, 0, bad), Error);
  SetThresholds bad_delta;
  bad_delta.delta_plus = 0.5;
  bad_delta.delta_minus = 0.1;
  CHECK_THROWS_AS(positive_negative_sets(m, 0, bad_delta), Error);
}

TEST_CASE("normalize_cloud centers, scales, and tolerates degenerate clouds") {
  const PointCloud cloud = random_cloud(64, 123, 3.0);
  const auto [normalized, annotation] = normalize_cloud(cloud);

  const Eigen::Vector3d centroid = normalized.points().rowwise().mean();
  CHECK(centroid.norm() < 1e-12);
  const double radius = normalized.points().colwise().norm().maxCoeff();
  CHECK(radius == doctest::Approx(0.5).epsilon(1e-12));

  const PointCloud restored = apply_pose(normalized, annotation);
  CHECK((restored.points() - cloud.points()).cwiseAbs().maxCoeff() < 1e-9);

  // All points identical: no spread to divide by.
  const PointCloud degenerate = cloud_from({{1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}});
  const auto [flat, pose] = normalize_cloud(degenerate);
  CHECK(pose.scale() == 1.0);
  CHECK(flat.points().allFinite());
}
