#include <doctest.h>

#include <algorithm>
#include <set>

#include "retreg/features/fpfh.hpp"
#include "retreg/features/matching.hpp"
#include "retreg/geometry/pose.hpp"
#include "retreg/reference.hpp"
#include "test_helpers.hpp"

using namespace retreg;
using namespace retreg::testing;

namespace {

double row_distance(const FeatureSet::Matrix& a, int i, const FeatureSet::Matrix& b, int j) {
  return std::sqrt(feature_squared_distance(a, i, b, j));
}

}  // namespace

TEST_CASE("fpfh rows are unit length") {
  const PointCloud cloud = random_cloud(200, 1, 0.5);
  const FeatureSet f = extract_fpfh(cloud);
  CHECK(f.size() == cloud.size());
  CHECK(f.dim() == 33);
  for (int i = 0; i < f.size(); ++i) {
    double norm = 0.0;
    for (int k = 0; k < f.dim(); ++k) norm += double(f.matrix()(i, k)) * double(f.matrix()(i, k));
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-6);
  }
}

TEST_CASE("fpfh is invariant to rigid transforms row-for-row") {
  const PointCloud cloud = sphere_cloud(300, 2);
  Pose p = random_pose(3);
  p = Pose(p.rotation(), p.translation(), 1.0);
  const PointCloud moved = apply_pose(cloud, p);

  const FeatureSet fa = extract_fpfh(cloud);
  const FeatureSet fb = extract_fpfh(moved);
  double worst = 0.0;
  for (int i = 0; i < fa.size(); ++i) {
    worst = std::max(worst, row_distance(fa.matrix(), i, fb.matrix(), i));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("fpfh on a planar patch gives near-identical interior descriptors") {
  SplitMix64 rng(77);
  const int n = 300;
  Eigen::Matrix3Xd pts(3, n);
  for (int i = 0; i < n; ++i) {
    pts.col(i) = Eigen::Vector3d(uniform_in(rng, -0.5, 0.5), uniform_in(rng, -0.5, 0.5), 0.0);
  }
  const PointCloud plane(std::move(pts), "plane");
  const FeatureSet f = extract_fpfh(plane);

  // Interior: well away from the patch boundary.
  std::vector<int> interior;
  for (int i = 0; i < n; ++i) {
    if (plane.point(i).head<2>().cwiseAbs().maxCoeff() < 0.25) interior.push_back(i);
  }
  REQUIRE(interior.size() >= 10);
  for (size_t a = 0; a < interior.size(); ++a) {
    for (size_t b = a + 1; b < interior.size(); ++b) {
      CHECK(row_distance(f.matrix(), interior[a], f.matrix(), interior[b]) < 0.05);
    }
  }
}

TEST_CASE("fpfh starved neighborhoods receive the uniform histogram") {
  // Four clustered points plus one far outlier: the outlier has no neighbors.
  const PointCloud cloud = cloud_from({{0.0, 0.0, 0.0},
                                       {0.01, 0.0, 0.0},
                                       {0.0, 0.01, 0.0},
                                       {0.01, 0.01, 0.0},
                                       {100.0, 100.0, 100.0}});
  const FeatureSet f = extract_fpfh(cloud, {0.05, 0.05});
  const float uniform = 1.0f / std::sqrt(33.0f);
  for (int k = 0; k < 33; ++k) CHECK(f.matrix()(4, k) == doctest::Approx(uniform).epsilon(1e-6));
}

TEST_CASE("fpfh parameter validation") {
  const PointCloud cloud = random_cloud(10, 3);
  CHECK_THROWS_AS(extract_fpfh(cloud, {0.0, 0.2}), Error);
  CHECK_THROWS_AS(extract_fpfh(cloud, {0.1, -0.2}), Error);
  CHECK_THROWS_AS(extract_fpfh(random_cloud(4, 4)), Error);
}

TEST_CASE("extract_pairs examples and oracle") {
  const PointCloud c = random_cloud(25, 9, 0.5);
  const auto diag = extract_pairs(c, c, 1e-6);
  std::set<std::pair<int, int>> got;
  for (const auto& p : diag) got.insert({p.query_index, p.model_index});
  for (int i = 0; i < c.size(); ++i) CHECK(got.count({i, i}) == 1);

  // Disjoint supports.
  const PointCloud far_cloud =
      apply_pose(c, Pose(Eigen::Matrix3d::Identity(), {10.0, 0.0, 0.0}));
  CHECK(extract_pairs(c, far_cloud, 1.0).empty());

  for (uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud a = random_cloud(30, mix_seed(100, seed), 0.3);
    const PointCloud b = random_cloud(30, mix_seed(101, seed), 0.3);
    const auto fast = extract_pairs(a, b, 0.1);
    const auto brute = reference::extract_pairs(a, b, 0.1);
    CHECK(fast == brute);
  }

  CHECK_THROWS_AS(extract_pairs(c, c, 0.0), Error);
  CHECK_THROWS_AS(extract_pairs(c, c, -0.5), Error);
}

TEST_CASE("extract_pairs transposes") {
  const PointCloud a = random_cloud(20, 55, 0.3);
  const PointCloud b = random_cloud(24, 56, 0.3);
  const auto ab = extract_pairs(a, b, 0.15);
  auto ba = extract_pairs(b, a, 0.15);
  for (auto& p : ba) std::swap(p.query_index, p.model_index);
  std::set<std::pair<int, int>> sab, sba;
  for (const auto& p : ab) sab.insert({p.query_index, p.model_index});
  for (const auto& p : ba) sba.insert({p.query_index, p.model_index});
  CHECK(sab == sba);
}

TEST_CASE("sample_negative_pairs honors the margin, the seed, and the error contract") {
  const PointCloud a = random_cloud(20, 200, 0.5);
  const PointCloud b = random_cloud(20, 201, 0.5);
  const auto positives = extract_pairs(a, b, 0.1);

  const auto negatives = sample_negative_pairs(a, b, positives, 50, 42, 0.1);
  CHECK(negatives.size() == 50);
  std::set<std::pair<int, int>> positive_set;
  for (const auto& p : positives) positive_set.insert({p.query_index, p.model_index});
  for (const auto& p : negatives) {
    CHECK(squared_distance(a.point(p.query_index), b.point(p.model_index)) >= 0.1 * 0.1);
    CHECK(positive_set.count({p.query_index, p.model_index}) == 0);
  }

  CHECK(sample_negative_pairs(a, b, positives, 50, 42, 0.1) == negatives);  // determinism
  CHECK(sample_negative_pairs(a, b, positives, 50, 43, 0.1) != negatives);

  // Identical overlapping clouds with a margin beyond the diameter: nothing qualifies.
  const PointCloud tight = random_cloud(10, 202, 0.01);
  try {
    sample_negative_pairs(tight, tight, {}, 1, 0, 10.0);
    FAIL("expected no negatives");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_negatives);
  }
}

TEST_CASE("build_pair_sets keeps positives and negatives disjoint") {
  const PointCloud a = random_cloud(25, 210, 0.4);
  const PointCloud b = random_cloud(25, 211, 0.4);
  const PairSets sets = build_pair_sets(a, b, 40, 7, 0.2);
  CHECK(!sets.positives.empty());
  CHECK(sets.negatives.size() == 40);
  std::set<std::pair<int, int>> positive_keys;
  for (const auto& p : sets.positives) {
    CHECK(squared_distance(a.point(p.query_index), b.point(p.model_index)) < 0.2 * 0.2);
    positive_keys.insert({p.query_index, p.model_index});
  }
  for (const auto& n : sets.negatives) {
    CHECK(positive_keys.count({n.query_index, n.model_index}) == 0);
  }
}

TEST_CASE("knn_match examples and oracle") {
  const FeatureSet f = random_features(15, 8, 7);
  const auto self = knn_match(f, f, 1);
  REQUIRE(self.size() == 15);
  for (int i = 0; i < 15; ++i) {
    CHECK(self[i].query_index == i);
    CHECK(self[i].model_index == i);  // own copy is the nearest neighbor
  }

  const FeatureSet q = random_features(20, 8, 8);
  const FeatureSet m = random_features(12, 8, 9);
  const auto all = knn_match(q, m, 12);
  CHECK(all.size() == 20u * 12u);  // exhaustive bipartite set

  for (uint64_t seed = 0; seed < 10; ++seed) {
    const FeatureSet qq = random_features(20, 8, mix_seed(300, seed));
    const FeatureSet mm = random_features(17, 8, mix_seed(301, seed));
    CHECK(knn_match(qq, mm, 3) == reference::knn_match(qq, mm, 3));
  }

  CHECK_THROWS_AS(knn_match(q, random_features(5, 9, 1), 2), Error);  // dim mismatch
  CHECK_THROWS_AS(knn_match(q, m, 0), Error);
  CHECK_THROWS_AS(knn_match(q, m, 13), Error);
}

TEST_CASE("knn_match is invariant to query row permutation") {
  const FeatureSet q = random_features(18, 8, 500);
  const FeatureSet m = random_features(25, 8, 501);
  const auto base = knn_match(q, m, 4);

  // Reverse the query rows and relabel the output.
  FeatureSet::Matrix reversed = q.matrix().colwise().reverse();
  const FeatureSet qr(std::move(reversed), FeatureSource::external);
  auto permuted = knn_match(qr, m, 4);
  for (auto& c : permuted) c.query_index = q.size() - 1 - c.query_index;
  std::sort(permuted.begin(), permuted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.query_index, a.model_index) < std::tie(b.query_index, b.model_index);
  });
  auto sorted_base = base;
  std::sort(sorted_base.begin(), sorted_base.end(), [](const auto& a, const auto& b) {
    return std::tie(a.query_index, a.model_index) < std::tie(b.query_index, b.model_index);
  });
  CHECK(permuted == sorted_base);
}

TEST_CASE("for unit rows, L2 and cosine similarity induce the same ranking") {
  const FeatureSet q = random_features(10, 16, 600);
  const FeatureSet m = random_features(40, 16, 601);
  for (int i = 0; i < q.size(); ++i) {
    std::vector<std::pair<double, int>> by_l2, by_cos;
    for (int j = 0; j < m.size(); ++j) {
      by_l2.push_back({feature_squared_distance(q.matrix(), i, m.matrix(), j), j});
      double dot = 0.0;
      for (int k = 0; k < 16; ++k) {
        dot += double(q.matrix()(i, k)) * double(m.matrix()(j, k));
      }
      by_cos.push_back({-dot, j});  // descending cosine similarity
    }
    std::sort(by_l2.begin(), by_l2.end());
    std::sort(by_cos.begin(), by_cos.end());
    for (int r = 0; r < 5; ++r) CHECK(by_l2[r].second == by_cos[r].second);
  }
}

TEST_CASE("feature set constructors validate shape and norms") {
  FeatureSet::Matrix zero_row(2, 4);
  zero_row.setZero();
  zero_row(0, 0) = 1.0f;
  CHECK_THROWS_AS(FeatureSet(zero_row, FeatureSource::external), Error);
  CHECK_THROWS_AS(FeatureSet::from_unnormalized(zero_row, FeatureSource::external), Error);

  FeatureSet::Matrix fine(2, 4);
  fine.setZero();
  fine(0, 0) = 3.0f;
  fine(1, 1) = -2.0f;
  const FeatureSet f = FeatureSet::from_unnormalized(fine, FeatureSource::fpfh);
  CHECK(f.matrix()(0, 0) == 1.0f);
  CHECK(f.matrix()(1, 1) == -1.0f);
}
