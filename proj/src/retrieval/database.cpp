#include "retreg/retrieval/database.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "retreg/features/crsf.hpp"
#include "retreg/features/fpfh.hpp"
#include "retreg/geometry/pose.hpp"
#include "retreg/io/cloud_io.hpp"

namespace retreg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path, Errc missing_code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(missing_code, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json parse_json(const std::string& text, const std::string& path) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse_error, "JSON error in '" + path + "': " + e.what());
  }
}

struct ManifestModel {
  std::string id;
  std::string cloud_path;
  std::string feature_path;    // empty when absent
  std::string embedding_path;  // empty when absent
  int symmetry_classes = 1;
};

struct Manifest {
  std::string category;
  std::vector<ManifestModel> models;
};

Manifest parse_manifest(const ordered_json& doc, const std::string& path) {
  Manifest manifest;
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array()) {
    fail(Errc::parse_error, "manifest '" + path + "' must be an object with a models array");
  }
  manifest.category = doc.value("category", std::string("unknown"));
  for (const auto& m : doc["models"]) {
    ManifestModel model;
    if (!m.contains("id") || !m.contains("cloud_path")) {
      fail(Errc::parse_error, "manifest entry without id/cloud_path in '" + path + "'");
    }
    model.id = m["id"].get<std::string>();
    model.cloud_path = m["cloud_path"].get<std::string>();
    model.feature_path = m.value("feature_path", std::string());
    model.embedding_path = m.value("embedding_path", std::string());
    model.symmetry_classes = m.value("symmetry_classes", 1);
    if (model.symmetry_classes < 1) {
      fail(Errc::invalid_argument, "model '" + model.id + "' has symmetry_classes < 1");
    }
    manifest.models.push_back(std::move(model));
  }
  if (manifest.models.empty()) fail(Errc::invalid_argument, "manifest '" + path + "' lists no models");
  return manifest;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return path;
  return (fs::path(base_dir) / p).string();
}

ModelEntry build_entry(const ManifestModel& m, const std::string& base_dir,
                       std::optional<FeatureSet::Matrix> stored_features) {
  PointCloud raw = read_cloud(resolve(base_dir, m.cloud_path), m.id);
  auto [cloud, annotation] = normalize_cloud(raw);

  std::optional<FeatureSet> features;
  if (stored_features) {
    features.emplace(std::move(*stored_features), FeatureSource::external);
  } else if (!m.feature_path.empty()) {
    features.emplace(load_features(resolve(base_dir, m.feature_path), cloud.size()));
  } else {
    features.emplace(extract_fpfh(cloud));
  }

  std::optional<Embedding> embedding;
  if (!m.embedding_path.empty()) {
    FeatureSet::Matrix rows = read_crsf(resolve(base_dir, m.embedding_path));
    if (rows.rows() != 1) {
      fail(Errc::parse_error, "embedding file for '" + m.id + "' must hold a single row");
    }
    Eigen::VectorXf v = rows.row(0).transpose();
    double sum = 0.0;
    for (int i = 0; i < v.size(); ++i) sum += static_cast<double>(v[i]) * static_cast<double>(v[i]);
    const double norm = std::sqrt(sum);
    if (norm <= 0.0) fail(Errc::invalid_argument, "zero embedding for '" + m.id + "'");
    if (std::abs(norm - 1.0) > 1e-6) {
      for (int i = 0; i < v.size(); ++i) v[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    }
    embedding.emplace(std::move(v), EmbeddingSource::external);
  } else {
    embedding.emplace(pooled_embedding(*features));
  }

  return ModelEntry{m.id, std::move(cloud), std::move(*embedding), std::move(*features),
                    m.symmetry_classes, std::nullopt};
}

std::vector<ModelEntry> build_entries(const Manifest& manifest, const std::string& base_dir,
                                      const std::string& manifest_path,
                                      std::vector<FeatureSet::Matrix>* stored_features) {
  {
    std::vector<std::string> ids;
    for (const auto& m : manifest.models) ids.push_back(m.id);
    std::sort(ids.begin(), ids.end());
    const auto dup = std::adjacent_find(ids.begin(), ids.end());
    if (dup != ids.end()) {
      fail(Errc::duplicate_id, "duplicate model id '" + *dup + "' in '" + manifest_path + "'");
    }
  }

  const int n = static_cast<int>(manifest.models.size());
  std::vector<std::optional<ModelEntry>> slots(n);
  std::vector<std::exception_ptr> errors(n);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      std::optional<FeatureSet::Matrix> stored;
      if (stored_features) stored = std::move((*stored_features)[i]);
      slots[i] = build_entry(manifest.models[i], base_dir, std::move(stored));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (int i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }

  std::vector<ModelEntry> entries;
  entries.reserve(n);
  for (int i = 0; i < n; ++i) entries.push_back(std::move(*slots[i]));
  return entries;
}

}  // namespace

ModelDatabase::ModelDatabase(std::string category, std::vector<ModelEntry> entries,
                             std::string manifest_json, std::string manifest_dir)
    : category_(std::move(category)),
      entries_(std::move(entries)),
      manifest_json_(std::move(manifest_json)),
      manifest_dir_(std::move(manifest_dir)) {
  if (entries_.empty()) fail(Errc::invalid_argument, "database has no entries");
  embedding_dim_ = entries_.front().embedding.dim();
  feature_dim_ = entries_.front().features.dim();
  for (const ModelEntry& e : entries_) {
    if (e.embedding.dim() != embedding_dim_) {
      fail(Errc::dim_mismatch, "embedding dimension mismatch for '" + e.id + "'");
    }
    if (e.features.dim() != feature_dim_) {
      fail(Errc::dim_mismatch, "feature dimension mismatch for '" + e.id + "'");
    }
  }
}

int ModelDatabase::find(const std::string& id) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  return -1;
}

ModelDatabase build_database(const std::string& manifest_path) {
  const std::string text = slurp(manifest_path, Errc::missing_file);
  const ordered_json doc = parse_json(text, manifest_path);
  const Manifest manifest = parse_manifest(doc, manifest_path);
  const std::string base_dir = fs::path(manifest_path).parent_path().string();
  std::vector<ModelEntry> entries = build_entries(manifest, base_dir, manifest_path, nullptr);
  return ModelDatabase(manifest.category, std::move(entries), text, base_dir);
}

void save_database(const ModelDatabase& db, const std::string& index_dir) {
  fs::create_directories(fs::path(index_dir) / "features");

  std::ofstream manifest_out(fs::path(index_dir) / "manifest.json", std::ios::binary);
  if (!manifest_out) fail(Errc::io_error, "cannot write manifest copy in '" + index_dir + "'");
  manifest_out << db.manifest_json();

  FeatureSet::Matrix embeddings(db.size(), db.embedding_dim());
  for (int i = 0; i < db.size(); ++i) {
    const ModelEntry& e = db.entry(i);
    write_crsf((fs::path(index_dir) / "features" / (e.id + ".crsf")).string(), e.features.matrix());
    embeddings.row(i) = e.embedding.vector().transpose();
  }
  write_crsf((fs::path(index_dir) / "embeddings.crsf").string(), embeddings);

  ordered_json meta;
  meta["category"] = db.category();
  meta["manifest_dir"] = db.manifest_dir();
  meta["embedding_dim"] = db.embedding_dim();
  meta["feature_dim"] = db.feature_dim();
  std::ofstream meta_out(fs::path(index_dir) / "index.json", std::ios::binary);
  if (!meta_out) fail(Errc::io_error, "cannot write index metadata in '" + index_dir + "'");
  meta_out << meta.dump(2) << '\n';
}

ModelDatabase load_database(const std::string& index_dir) {
  const std::string meta_path = (fs::path(index_dir) / "index.json").string();
  const ordered_json meta = parse_json(slurp(meta_path, Errc::missing_file), meta_path);
  const std::string manifest_path = (fs::path(index_dir) / "manifest.json").string();
  const std::string text = slurp(manifest_path, Errc::missing_file);
  const Manifest manifest = parse_manifest(parse_json(text, manifest_path), manifest_path);
  const std::string base_dir = meta.value("manifest_dir", std::string());

  const int n = static_cast<int>(manifest.models.size());
  FeatureSet::Matrix embeddings = read_crsf((fs::path(index_dir) / "embeddings.crsf").string());
  if (embeddings.rows() != n) {
    fail(Errc::count_mismatch, "embeddings.crsf row count does not match manifest in '" + index_dir + "'");
  }

  // Stored features and embeddings take precedence over the manifest's own
  // feature/embedding paths so a reload reproduces the build bit for bit.
  std::vector<FeatureSet::Matrix> stored(n);
  for (int i = 0; i < n; ++i) {
    stored[i] =
        read_crsf((fs::path(index_dir) / "features" / (manifest.models[i].id + ".crsf")).string());
  }

  Manifest adjusted = manifest;
  for (auto& m : adjusted.models) m.embedding_path.clear();
  std::vector<ModelEntry> entries = build_entries(adjusted, base_dir, manifest_path, &stored);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXf v = embeddings.row(i).transpose();
    double sum = 0.0;
    for (int k = 0; k < v.size(); ++k) sum += static_cast<double>(v[k]) * static_cast<double>(v[k]);
    const double norm = std::sqrt(sum);
    if (norm <= 0.0) fail(Errc::invalid_argument, "zero stored embedding in '" + index_dir + "'");
    if (std::abs(norm - 1.0) > 1e-6) {
      for (int k = 0; k < v.size(); ++k) v[k] = static_cast<float>(static_cast<double>(v[k]) / norm);
    }
    entries[i].embedding = Embedding(std::move(v), EmbeddingSource::external);
  }
  return ModelDatabase(meta.value("category", manifest.category), std::move(entries), text, base_dir);
}

std::vector<std::pair<std::string, double>> retrieve(const Embedding& query,
                                                     const ModelDatabase& db, int m) {
  if (m < 1 || m > db.size()) fail(Errc::invalid_argument, "m must be within [1, database size]");
  if (query.dim() != db.embedding_dim()) fail(Errc::dim_mismatch, "embedding dimension mismatch");

  std::vector<int> order(db.size());
  std::vector<double> dist(db.size());
  for (int i = 0; i < db.size(); ++i) {
    order[i] = i;
    dist[i] = embedding_distance(query, db.entry(i).embedding);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return db.entry(a).id < db.entry(b).id;
  });

  std::vector<std::pair<std::string, double>> out;
  out.reserve(m);
  for (int r = 0; r < m; ++r) out.emplace_back(db.entry(order[r]).id, dist[order[r]]);
  return out;
}

}  // namespace retreg
