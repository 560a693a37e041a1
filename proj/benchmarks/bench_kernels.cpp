// Parallel kernels vs their serial reference implementations.

#include <benchmark/benchmark.h>

#include "retreg/core/rng.hpp"
#include "retreg/features/matching.hpp"
#include "retreg/geometry/distances.hpp"
#include "retreg/reference.hpp"

using namespace retreg;

namespace {

PointCloud random_cloud(int n, uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::Matrix3Xd pts(3, n);
  for (int i = 0; i < n; ++i) {
    pts.col(i) = Eigen::Vector3d(uniform_in(rng, -0.5, 0.5), uniform_in(rng, -0.5, 0.5),
                                 uniform_in(rng, -0.5, 0.5));
  }
  return PointCloud(std::move(pts), "bench");
}

FeatureSet random_features(int n, int dim, uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureSet::Matrix rows(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) rows(i, k) = static_cast<float>(uniform_in(rng, -1.0, 1.0));
  }
  return FeatureSet::from_unnormalized(std::move(rows), FeatureSource::external);
}

std::vector<PointCloud> random_models(int count, int n, uint64_t seed) {
  std::vector<PointCloud> models;
  models.reserve(count);
  for (int i = 0; i < count; ++i) models.push_back(random_cloud(n, mix_seed(seed, i)));
  return models;
}

void BM_scd_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud a = random_cloud(n, 1);
  const PointCloud b = random_cloud(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(reference::scd(a, b));
}

void BM_scd_parallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PointCloud a = random_cloud(n, 1);
  const PointCloud b = random_cloud(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(scd(a, b));
}

void BM_similarity_reference(benchmark::State& state) {
  const auto models = random_models(12, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(reference::similarity_matrix(models));
}

void BM_similarity_parallel(benchmark::State& state) {
  const auto models = random_models(12, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(models));
}

void BM_knn_reference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FeatureSet q = random_features(n, 33, 4);
  const FeatureSet m = random_features(n, 33, 5);
  for (auto _ : state) benchmark::DoNotOptimize(reference::knn_match(q, m, 5));
}

void BM_knn_parallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FeatureSet q = random_features(n, 33, 4);
  const FeatureSet m = random_features(n, 33, 5);
  for (auto _ : state) benchmark::DoNotOptimize(knn_match(q, m, 5));
}

}  // namespace

BENCHMARK(BM_scd_reference)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_scd_parallel)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_similarity_reference)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_similarity_parallel)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn_reference)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn_parallel)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
