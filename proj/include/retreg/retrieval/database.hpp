#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retreg/features/feature_set.hpp"
#include "retreg/geometry/point_cloud.hpp"
#include "retreg/retrieval/embedding.hpp"
#include "retreg/symmetry/split.hpp"

namespace retreg {

struct ModelEntry {
  std::string id;
  PointCloud cloud;  // normalized (unit bounding diameter, centroid at origin)
  Embedding embedding;
  FeatureSet features;
  int symmetry_classes = 1;
  std::optional<SymmetrySplit> symmetry_split;
};

// Indexed model collection with precomputed embeddings and local features.
// Immutable after build; concurrent retrievals are safe.
class ModelDatabase {
 public:
  ModelDatabase(std::string category, std::vector<ModelEntry> entries, std::string manifest_json,
                std::string manifest_dir);

  const std::string& category() const { return category_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const ModelEntry& entry(int i) const { return entries_[i]; }
  const std::vector<ModelEntry>& entries() const { return entries_; }
  int find(const std::string& id) const;  // -1 when absent
  int embedding_dim() const { return embedding_dim_; }
  int feature_dim() const { return feature_dim_; }
  const std::string& manifest_json() const { return manifest_json_; }
  const std::string& manifest_dir() const { return manifest_dir_; }

 private:
  std::string category_;
  std::vector<ModelEntry> entries_;
  std::string manifest_json_;  // verbatim manifest copy, persisted with the index
  std::string manifest_dir_;   // directory cloud paths resolve against
  int embedding_dim_ = 0;
  int feature_dim_ = 0;
};

// Builds a database from a JSON manifest: {category, models: [{id,
// cloud_path, feature_path?, embedding_path?, symmetry_classes}]}. Missing
// feature files fall back to FPFH extraction; missing embeddings to pooled
// features.
ModelDatabase build_database(const std::string& manifest_path);

// Persisted index: manifest copy, one CRSF per entry under features/, and a
// single stacked CRSF of embeddings.
void save_database(const ModelDatabase& db, const std::string& index_dir);
ModelDatabase load_database(const std::string& index_dir);

// The m entries nearest to the query embedding, ascending distance, ties by
// ascending id. Exact linear scan.
std::vector<std::pair<std::string, double>> retrieve(const Embedding& query,
                                                     const ModelDatabase& db, int m);

}  // namespace retreg
