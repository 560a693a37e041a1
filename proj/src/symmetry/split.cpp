#include "retreg/symmetry/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "retreg/core/kdtree.hpp"
#include "retreg/core/rng.hpp"

namespace retreg {

namespace {

constexpr int kMaxKMeansIterations = 50;

// Nearest centroid, ties to the lowest index.
int nearest_centroid(const Eigen::Matrix3Xd& centroids, const Eigen::Vector3d& p) {
  int best = 0;
  double best_d = squared_distance(p, centroids.col(0));
  for (int c = 1; c < centroids.cols(); ++c) {
    const double d = squared_distance(p, centroids.col(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// k-means++ seeding over the subset; nullopt when the subset cannot support
// g distinct centers.
std::optional<Eigen::Matrix3Xd> kmeans_pp_init(const Eigen::Matrix3Xd& pts,
                                               const std::vector<int>& subset, int g,
                                               SplitMix64& rng) {
  const int m = static_cast<int>(subset.size());
  Eigen::Matrix3Xd centroids(3, g);
  centroids.col(0) = pts.col(subset[uniform_index(rng, m)]);

  std::vector<double> d2(m);
  for (int c = 1; c < g; ++c) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int cc = 0; cc < c; ++cc) {
        best = std::min(best, squared_distance(pts.col(subset[i]), centroids.col(cc)));
      }
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) return std::nullopt;  // fewer than g distinct locations
    double target = uniform_unit(rng) * total;
    int pick = m - 1;
    double cumulative = 0.0;
    for (int i = 0; i < m; ++i) {
      cumulative += d2[i];
      if (target < cumulative) {
        pick = i;
        break;
      }
    }
    centroids.col(c) = pts.col(subset[pick]);
  }
  return centroids;
}

// Lloyd iterations over the subset coordinates. Empty clusters steal the
// point farthest from its current centroid (deterministic tie-break).
std::optional<Eigen::Matrix3Xd> kmeans(const Eigen::Matrix3Xd& pts, const std::vector<int>& subset,
                                       int g, SplitMix64& rng) {
  const int m = static_cast<int>(subset.size());
  if (m < g) return std::nullopt;
  auto init = kmeans_pp_init(pts, subset, g, rng);
  if (!init) return std::nullopt;
  Eigen::Matrix3Xd centroids = *init;

  std::vector<int> labels(m, -1);
  for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
    bool changed = false;
    for (int i = 0; i < m; ++i) {
      const int c = nearest_centroid(centroids, pts.col(subset[i]));
      if (c != labels[i]) {
        labels[i] = c;
        changed = true;
      }
    }

    std::vector<int> counts(g, 0);
    for (int l : labels) ++counts[l];
    for (int c = 0; c < g; ++c) {
      if (counts[c] > 0) continue;
      int worst = -1;
      double worst_d = -1.0;
      for (int i = 0; i < m; ++i) {
        if (counts[labels[i]] <= 1) continue;
        const double d = squared_distance(pts.col(subset[i]), centroids.col(labels[i]));
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      if (worst < 0) return std::nullopt;
      --counts[labels[worst]];
      labels[worst] = c;
      ++counts[c];
      changed = true;
    }

    Eigen::Matrix3Xd sums = Eigen::Matrix3Xd::Zero(3, g);
    for (int i = 0; i < m; ++i) sums.col(labels[i]) += pts.col(subset[i]);
    for (int c = 0; c < g; ++c) centroids.col(c) = sums.col(c) / static_cast<double>(counts[c]);

    if (!changed && iter > 0) break;
  }
  return centroids;
}

}  // namespace

double split_evenness(const std::vector<int>& assignment, int classes) {
  std::vector<double> sizes(classes, 0.0);
  for (int l : assignment) sizes[l] += 1.0;
  double mean = 0.0;
  for (double s : sizes) mean += s;
  mean /= static_cast<double>(classes);
  double var = 0.0;
  for (double s : sizes) var += (s - mean) * (s - mean);
  return std::sqrt(var / static_cast<double>(classes));
}

SymmetrySplit symmetry_split(const PointCloud& cloud, const FeatureSet& features, int g,
                             const SplitParams& params) {
  const int n = cloud.size();
  if (g < 2) fail(Errc::invalid_argument, "symmetry split needs g >= 2");
  if (features.size() != n) fail(Errc::count_mismatch, "features/cloud size mismatch");
  if (params.n_samples < 1) fail(Errc::invalid_argument, "n_samples must be >= 1");
  if (g > n) fail(Errc::degenerate_split, "degenerate symmetry split: g exceeds cloud size");

  const int k = std::min(n, params.k_neighbors > 0 ? params.k_neighbors : std::max(32, n / 20));
  SplitMix64 sampler(mix_seed(params.seed, 0x5a));
  const std::vector<int> samples = sample_without_replacement(sampler, n, params.n_samples);

  struct Candidate {
    bool ok = false;
    std::vector<int> assignment;
    Eigen::Matrix3Xd centroids;
    double evenness = std::numeric_limits<double>::infinity();
  };
  std::vector<Candidate> candidates(samples.size());

  const Eigen::Matrix3Xd& pts = cloud.points();
  const FeatureSet::Matrix& fm = features.matrix();
  const int s = static_cast<int>(samples.size());

#pragma omp parallel for schedule(dynamic)
  for (int si = 0; si < s; ++si) {
    // Feature-space k nearest neighbors of the sampled point (self included).
    std::vector<std::pair<double, int>> dist(n);
    for (int j = 0; j < n; ++j) dist[j] = {feature_squared_distance(fm, samples[si], fm, j), j};
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<int> subset(k);
    for (int j = 0; j < k; ++j) subset[j] = dist[j].second;

    SplitMix64 rng(mix_seed(params.seed, 0x6b00 + static_cast<uint64_t>(si)));
    const auto centroids = kmeans(pts, subset, g, rng);
    if (!centroids) continue;

    Candidate& cand = candidates[si];
    cand.assignment.resize(n);
    for (int j = 0; j < n; ++j) cand.assignment[j] = nearest_centroid(*centroids, pts.col(j));

    std::vector<int> counts(g, 0);
    for (int l : cand.assignment) ++counts[l];
    if (std::find(counts.begin(), counts.end(), 0) != counts.end()) continue;

    cand.centroids = *centroids;
    cand.evenness = split_evenness(cand.assignment, g);
    cand.ok = true;
  }

  int best = -1;
  for (int si = 0; si < s; ++si) {
    if (!candidates[si].ok) continue;
    if (best < 0 || candidates[si].evenness < candidates[best].evenness) best = si;
  }
  if (best < 0) fail(Errc::degenerate_split, "degenerate symmetry split");

  SymmetrySplit split;
  split.assignment = std::move(candidates[best].assignment);
  split.classes = g;
  split.centroids = std::move(candidates[best].centroids);
  split.evenness = candidates[best].evenness;
  return split;
}

}  // namespace retreg
