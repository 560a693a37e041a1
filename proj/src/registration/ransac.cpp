#include "retreg/registration/ransac.hpp"

#include <algorithm>
#include <optional>
#include <vector>

#include "retreg/core/kdtree.hpp"
#include "retreg/core/rng.hpp"
#include "retreg/geometry/distances.hpp"
#include "retreg/registration/kabsch.hpp"

namespace retreg {

namespace {

constexpr int kBlock = 256;  // early-exit granularity, fixed across schedules

struct Hypothesis {
  int inliers = -1;
  int iteration = 0;
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;

  bool beats(const Hypothesis& other) const {
    if (inliers != other.inliers) return inliers > other.inliers;
    return iteration < other.iteration;
  }
};

int count_inliers(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation,
                  const Eigen::Matrix3Xd& query, const Eigen::Matrix3Xd& model,
                  std::span<const Correspondence> corrs, double threshold_sq) {
  int inliers = 0;
  for (const Correspondence& c : corrs) {
    const Eigen::Vector3d mapped = rotation * model.col(c.model_index) + translation;
    if (squared_distance(mapped, query.col(c.query_index)) < threshold_sq) ++inliers;
  }
  return inliers;
}

}  // namespace

RegistrationResult ransac_register(const PointCloud& query, const PointCloud& model,
                                   std::span<const Correspondence> corrs,
                                   const RansacParams& params) {
  const int n = static_cast<int>(corrs.size());
  if (n < 3) fail(Errc::invalid_argument, "RANSAC needs at least 3 correspondences");
  if (params.iterations < 1) fail(Errc::invalid_argument, "RANSAC needs at least 1 iteration");
  if (!(params.inlier_threshold > 0.0)) {
    fail(Errc::invalid_argument, "inlier threshold must be positive");
  }
  for (const Correspondence& c : corrs) {
    if (c.query_index < 0 || c.query_index >= query.size() || c.model_index < 0 ||
        c.model_index >= model.size()) {
      fail(Errc::invalid_argument, "correspondence index out of bounds");
    }
  }

  const Eigen::Matrix3Xd& q = query.points();
  const Eigen::Matrix3Xd& m = model.points();
  const double threshold_sq = params.inlier_threshold * params.inlier_threshold;

  Hypothesis best;
  for (int block_start = 0; block_start < params.iterations; block_start += kBlock) {
    const int block_end = std::min(params.iterations, block_start + kBlock);

    std::vector<Hypothesis> locals;
#pragma omp parallel
    {
      Hypothesis local;
#pragma omp for schedule(static)
      for (int iter = block_start; iter < block_end; ++iter) {
        SplitMix64 rng(mix_seed(params.seed, static_cast<uint64_t>(iter)));
        int a = uniform_index(rng, n);
        int b = uniform_index(rng, n);
        while (b == a) b = uniform_index(rng, n);
        int c = uniform_index(rng, n);
        while (c == a || c == b) c = uniform_index(rng, n);

        Eigen::Matrix3d qs, ms;
        qs.col(0) = q.col(corrs[a].query_index);
        qs.col(1) = q.col(corrs[b].query_index);
        qs.col(2) = q.col(corrs[c].query_index);
        ms.col(0) = m.col(corrs[a].model_index);
        ms.col(1) = m.col(corrs[b].model_index);
        ms.col(2) = m.col(corrs[c].model_index);

        Eigen::Matrix3d rotation;
        Eigen::Vector3d translation;
        try {
          const Pose pose = kabsch(qs, ms);
          rotation = pose.rotation();
          translation = pose.translation();
        } catch (const Error&) {
          continue;  // degenerate minimal sample
        }

        Hypothesis h;
        h.inliers = count_inliers(rotation, translation, q, m, corrs, threshold_sq);
        h.iteration = iter;
        h.rotation = rotation;
        h.translation = translation;
        if (h.beats(local)) local = h;
      }
#pragma omp critical
      locals.push_back(local);
    }
    // Deterministic merge: the (inliers, iteration) order does not depend on
    // how iterations were distributed over threads.
    for (const Hypothesis& h : locals) {
      if (h.inliers >= 0 && h.beats(best)) best = h;
    }

    if (best.inliers > params.early_exit_inlier_ratio * n) break;
  }

  if (best.inliers < 0) fail(Errc::degenerate, "all RANSAC samples were degenerate");

  // Refine over the winning inlier set.
  Pose pose(best.rotation, best.translation);
  std::vector<Correspondence> inliers;
  inliers.reserve(best.inliers);
  for (const Correspondence& c : corrs) {
    const Eigen::Vector3d mapped = best.rotation * m.col(c.model_index) + best.translation;
    if (squared_distance(mapped, q.col(c.query_index)) < threshold_sq) inliers.push_back(c);
  }
  if (inliers.size() >= 3) {
    Eigen::Matrix3Xd qi(3, inliers.size());
    Eigen::Matrix3Xd mi(3, inliers.size());
    for (size_t i = 0; i < inliers.size(); ++i) {
      qi.col(i) = q.col(inliers[i].query_index);
      mi.col(i) = m.col(inliers[i].model_index);
    }
    try {
      pose = kabsch(qi, mi);
    } catch (const Error&) {
      // refinement degenerate; keep the minimal-sample pose
    }
  }

  RegistrationResult result;
  result.pose = pose;
  result.inlier_count =
      count_inliers(pose.rotation(), pose.translation(), q, m, corrs, threshold_sq);
  result.hypothesis_label = "unconstrained";
  result.alignment_scd = scd(query, apply_pose(model, pose));
  return result;
}

}  // namespace retreg
