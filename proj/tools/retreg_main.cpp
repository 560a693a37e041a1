#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "retreg/core/rng.hpp"
#include "retreg/features/crsf.hpp"
#include "retreg/features/fpfh.hpp"
#include "retreg/features/matching.hpp"
#include "retreg/harness/evaluation.hpp"
#include "retreg/harness/synthetic.hpp"
#include "retreg/io/cloud_io.hpp"
#include "retreg/registration/symmetry_register.hpp"
#include "retreg/retrieval/database.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace retreg;

namespace {

struct GlobalOptions {
  uint64_t seed = 0;
  int threads = 0;
  std::string format = "table";
};

std::string slurp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out << text;
}

ordered_json parse_json_file(const std::string& path) {
  try {
    return ordered_json::parse(slurp_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse_error, "JSON error in '" + path + "': " + e.what());
  }
}

SyntheticSpec spec_from_json(const ordered_json& doc) {
  SyntheticSpec spec;
  spec.family = shape_family_from_string(doc.value("family", std::string("chair_like")));
  spec.symmetry_classes = doc.value("symmetry_classes", spec.family == ShapeFamily::table_like ? 4 : 2);
  spec.points = doc.value("points", 1024);
  spec.noise_sigma = doc.value("noise_sigma", 0.0);
  spec.occlusion_fraction = doc.value("occlusion_fraction", 0.0);
  spec.seed = doc.value("seed", 0ull);
  if (doc.contains("shape_params")) {
    for (const auto& [key, value] : doc["shape_params"].items()) {
      spec.shape_params[key] = value.get<double>();
    }
  }
  return spec;
}

ordered_json pose_to_json(const Pose& pose) {
  ordered_json j;
  ordered_json rotation = ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rotation.push_back(pose.rotation()(r, c));
  }
  ordered_json translation = ordered_json::array();
  for (int r = 0; r < 3; ++r) translation.push_back(pose.translation()[r]);
  j["rotation"] = std::move(rotation);
  j["translation"] = std::move(translation);
  j["scale"] = pose.scale();
  return j;
}

ordered_json result_to_json(const RegistrationResult& result) {
  ordered_json j;
  ordered_json rotation = ordered_json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rotation.push_back(result.pose.rotation()(r, c));
  }
  ordered_json translation = ordered_json::array();
  for (int r = 0; r < 3; ++r) translation.push_back(result.pose.translation()[r]);
  j["rotation"] = std::move(rotation);
  j["translation"] = std::move(translation);
  j["inlier_count"] = result.inlier_count;
  j["hypothesis_label"] = result.hypothesis_label;
  j["alignment_scd"] = result.alignment_scd;
  return j;
}

std::string result_to_table(const RegistrationResult& result) {
  std::ostringstream out;
  out << "rotation:\n";
  for (int r = 0; r < 3; ++r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %+.9f %+.9f %+.9f\n", result.pose.rotation()(r, 0),
                  result.pose.rotation()(r, 1), result.pose.rotation()(r, 2));
    out << buf;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf), "translation: %+.9f %+.9f %+.9f\n",
                result.pose.translation()[0], result.pose.translation()[1],
                result.pose.translation()[2]);
  out << buf;
  out << "inlier_count: " << result.inlier_count << "\n";
  out << "hypothesis: " << result.hypothesis_label << "\n";
  std::snprintf(buf, sizeof(buf), "alignment_scd: %.9g\n", result.alignment_scd);
  out << buf;
  return out.str();
}

FeatureSet features_for(const PointCloud& cloud, const std::string& feature_path,
                        const FpfhParams& fpfh_params) {
  if (feature_path.empty()) return extract_fpfh(cloud, fpfh_params);
  return load_features(feature_path, cloud.size());
}

// synth: expand a synthetic dataset spec into model/query files plus a
// manifest usable by `index` and a query list usable by `evaluate`.
int run_synth(const GlobalOptions& global, const std::string& spec_path, const std::string& out_dir,
              int count, bool with_features) {
  const ordered_json doc = parse_json_file(spec_path);
  SyntheticSpec base = spec_from_json(doc);
  if (base.seed == 0) base.seed = global.seed;

  std::string morph_param;
  double morph_from = 0.0, morph_to = 0.0;
  if (doc.contains("morph")) {
    morph_param = doc["morph"].value("param", std::string());
    morph_from = doc["morph"].value("from", 0.0);
    morph_to = doc["morph"].value("to", 0.0);
  }

  fs::create_directories(fs::path(out_dir) / "models");
  fs::create_directories(fs::path(out_dir) / "queries");

  ordered_json manifest;
  manifest["category"] = to_string(base.family);
  ordered_json models = ordered_json::array();
  ordered_json queries = ordered_json::array();

  for (int i = 0; i < count; ++i) {
    SyntheticSpec spec = base;
    spec.seed = mix_seed(base.seed, static_cast<uint64_t>(i));
    if (!morph_param.empty() && count > 1) {
      const double t = static_cast<double>(i) / static_cast<double>(count - 1);
      spec.shape_params[morph_param] = morph_from + t * (morph_to - morph_from);
    }
    const SyntheticInstance instance = generate_synthetic(spec);

    char id[32];
    std::snprintf(id, sizeof(id), "%s_%03d", to_string(base.family).c_str(), i);

    const std::string model_rel = "models/" + std::string(id) + ".ply";
    const std::string query_rel = "queries/" + std::string(id) + ".ply";
    write_ply((fs::path(out_dir) / model_rel).string(), instance.model);
    // The evaluation protocol applies seeded rotations itself, so the query
    // list references canonical-orientation observations; the posed variant
    // plus its ground-truth pose file serve direct `register` experiments.
    write_ply((fs::path(out_dir) / query_rel).string(),
              to_ncc(instance.cloud, instance.ground_truth_pose));
    write_ply((fs::path(out_dir) / ("queries/" + std::string(id) + "_posed.ply")).string(),
              instance.cloud);

    ordered_json model_entry;
    model_entry["id"] = id;
    model_entry["cloud_path"] = model_rel;
    if (with_features) {
      const std::string feat_rel = "models/" + std::string(id) + ".crsf";
      write_features((fs::path(out_dir) / feat_rel).string(), instance.model_features);
      model_entry["feature_path"] = feat_rel;
    }
    model_entry["symmetry_classes"] = spec.symmetry_classes;
    models.push_back(std::move(model_entry));

    ordered_json query_entry;
    query_entry["id"] = id;
    query_entry["cloud_path"] = query_rel;
    if (with_features) {
      const std::string feat_rel = "queries/" + std::string(id) + ".crsf";
      write_features((fs::path(out_dir) / feat_rel).string(), instance.features);
      query_entry["feature_path"] = feat_rel;
    }
    query_entry["annotated_model"] = id;
    queries.push_back(std::move(query_entry));

    ordered_json gt;
    gt["pose"] = pose_to_json(instance.ground_truth_pose);  // maps <id>.ply onto <id>_posed.ply
    gt["symmetry_classes"] = spec.symmetry_classes;
    gt["labels"] = instance.ground_truth_split.assignment;
    write_text((fs::path(out_dir) / ("queries/" + std::string(id) + "_gt.json")).string(),
               gt.dump(2) + "\n");
  }

  manifest["models"] = std::move(models);
  write_text((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

  ordered_json query_list;
  query_list["queries"] = std::move(queries);
  write_text((fs::path(out_dir) / "queries.json").string(), query_list.dump(2) + "\n");

  std::cout << "wrote " << count << " instances under " << out_dir << "\n";
  return 0;
}

int run_extract(const std::string& cloud_path, const std::string& out_path,
                const FpfhParams& params, bool normalize) {
  PointCloud cloud = read_cloud(cloud_path);
  if (normalize) cloud = normalize_cloud(cloud).first;
  const FeatureSet features = extract_fpfh(cloud, params);
  write_features(out_path, features);
  std::cout << "wrote " << features.size() << "x" << features.dim() << " features to " << out_path
            << "\n";
  return 0;
}

int run_index(const std::string& manifest_path, std::string out_dir) {
  if (out_dir.empty()) {
    out_dir = (fs::path(manifest_path).parent_path() / "index").string();  // beside the manifest
  }
  const ModelDatabase db = build_database(manifest_path);
  save_database(db, out_dir);
  std::cout << "indexed " << db.size() << " models (" << db.category() << ", feature dim "
            << db.feature_dim() << ", embedding dim " << db.embedding_dim() << ") into " << out_dir
            << "\n";
  return 0;
}

int run_retrieve(const GlobalOptions& global, const std::string& query_path,
                 const std::string& feature_path, const std::string& index_dir, int m) {
  const ModelDatabase db = fs::exists(fs::path(index_dir) / "index.json")
                               ? load_database(index_dir)
                               : build_database(index_dir);
  auto [cloud, annotation] = normalize_cloud(read_cloud(query_path));
  const FeatureSet features = features_for(cloud, feature_path, {});
  const Embedding embedding = pooled_embedding(features, db.embedding_dim());
  const auto ranking = retrieve(embedding, db, std::min(m, db.size()));

  if (global.format == "json") {
    ordered_json doc = ordered_json::array();
    for (const auto& [id, distance] : ranking) {
      ordered_json r;
      r["id"] = id;
      r["distance"] = distance;
      doc.push_back(std::move(r));
    }
    std::cout << doc.dump(2) << "\n";
  } else {
    for (size_t r = 0; r < ranking.size(); ++r) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%3zu  %-24s %.9g\n", r + 1, ranking[r].first.c_str(),
                    ranking[r].second);
      std::cout << buf;
    }
  }
  return 0;
}

int run_register(const GlobalOptions& global, const std::string& query_path,
                 const std::string& model_path, const std::string& query_features_path,
                 const std::string& model_features_path, int symmetry, int k,
                 const RansacParams& ransac_in, const std::string& split_debug_prefix) {
  auto [query, query_annotation] = normalize_cloud(read_cloud(query_path, "query"));
  auto [model, model_annotation] = normalize_cloud(read_cloud(model_path, "model"));
  const FeatureSet query_features = features_for(query, query_features_path, {});
  const FeatureSet model_features = features_for(model, model_features_path, {});

  SymmetryRegisterParams params;
  params.knn_k = k;
  params.ransac = ransac_in;
  params.ransac.seed = global.seed;
  params.split.seed = mix_seed(global.seed, 0x517);

  const RegistrationResult result = symmetry_aware_register(query, query_features, model,
                                                            model_features, symmetry, params);

  if (!split_debug_prefix.empty() && symmetry >= 2) {
    SplitParams qsp = params.split;
    qsp.seed = mix_seed(params.split.seed, 0x71);
    SplitParams msp = params.split;
    msp.seed = mix_seed(params.split.seed, 0x72);
    const SymmetrySplit qs = symmetry_split(query, query_features, symmetry, qsp);
    const SymmetrySplit ms = symmetry_split(model, model_features, symmetry, msp);
    write_ply_with_labels(split_debug_prefix + "_query.ply", query, qs.assignment);
    write_ply_with_labels(split_debug_prefix + "_model.ply", model, ms.assignment);
  }

  if (global.format == "json") {
    std::cout << result_to_json(result).dump(2) << "\n";
  } else {
    std::cout << result_to_table(result);
  }
  return 0;
}

int run_evaluate(const GlobalOptions& global, const std::string& config_path,
                 const std::string& out_path) {
  EvalConfig config = load_eval_config(config_path);
  if (global.seed != 0) config.seed = global.seed;
  const EvalReport report = run_evaluation(config);
  const std::string text =
      global.format == "json" ? report_to_json(report) : report_to_table(report);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
    std::cout << "wrote report to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Category-level point-cloud retrieval and registration toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Root random seed")->capture_default_str();
  app.add_option("--threads", global.threads, "OpenMP thread count (0 = runtime default)")
      ->capture_default_str();
  app.add_option("--format", global.format, "Output format")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a spec file");
  std::string spec_path, out_dir;
  int count = 1;
  bool no_features = false;
  synth->add_option("--spec", spec_path, "SyntheticSpec JSON file")->required();
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--count", count, "Number of instances")->capture_default_str();
  synth->add_flag("--no-features", no_features, "Skip CRSF descriptor files");

  auto* extract = app.add_subcommand("extract", "Extract FPFH descriptors from a cloud");
  std::string extract_cloud, extract_out;
  FpfhParams fpfh_params;
  bool extract_raw = false;
  extract->add_option("--cloud", extract_cloud, "Input cloud (.xyz/.ply)")->required();
  extract->add_option("--out", extract_out, "Output CRSF path")->required();
  extract->add_option("--normal-radius", fpfh_params.normal_radius)->capture_default_str();
  extract->add_option("--feature-radius", fpfh_params.feature_radius)->capture_default_str();
  extract->add_flag("--raw", extract_raw, "Skip unit-diameter normalization");

  auto* index = app.add_subcommand("index", "Build and persist a model database");
  std::string manifest_path, index_out;
  index->add_option("--manifest", manifest_path, "Manifest JSON")->required();
  index->add_option("--out", index_out, "Index directory (default: 'index' beside the manifest)");

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank database models for a query");
  std::string retrieve_query, retrieve_features, retrieve_index;
  int retrieve_m = 5;
  retrieve_cmd->add_option("--query", retrieve_query, "Query cloud")->required();
  retrieve_cmd->add_option("--query-features", retrieve_features, "Query CRSF descriptors");
  retrieve_cmd->add_option("--index", retrieve_index, "Index directory or manifest")->required();
  retrieve_cmd->add_option("-m", retrieve_m, "Ranking length")->capture_default_str();

  auto* register_cmd = app.add_subcommand("register", "Estimate the pose of a model vs a query");
  std::string reg_query, reg_model, reg_qf, reg_mf, split_debug;
  int reg_symmetry = 1, reg_k = 5;
  RansacParams reg_ransac;
  register_cmd->add_option("--query", reg_query, "Query cloud")->required();
  register_cmd->add_option("--model", reg_model, "Model cloud")->required();
  register_cmd->add_option("--query-features", reg_qf, "Query CRSF descriptors");
  register_cmd->add_option("--model-features", reg_mf, "Model CRSF descriptors");
  register_cmd->add_option("--symmetry", reg_symmetry, "Symmetry class count G")
      ->capture_default_str();
  register_cmd->add_option("--k", reg_k, "Feature kNN size")->capture_default_str();
  register_cmd->add_option("--iterations", reg_ransac.iterations)->capture_default_str();
  register_cmd->add_option("--inlier-threshold", reg_ransac.inlier_threshold)
      ->capture_default_str();
  register_cmd->add_option("--emit-split-ply", split_debug,
                           "Prefix for labeled symmetry-split debug PLYs");

  auto* evaluate = app.add_subcommand("evaluate", "Run an evaluation config and emit a report");
  std::string eval_config, eval_out;
  evaluate->add_option("--config", eval_config, "Evaluation config JSON")->required();
  evaluate->add_option("--out", eval_out, "Report output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (global.threads > 0) omp_set_num_threads(global.threads);

  try {
    if (synth->parsed()) return run_synth(global, spec_path, out_dir, count, !no_features);
    if (extract->parsed()) return run_extract(extract_cloud, extract_out, fpfh_params, !extract_raw);
    if (index->parsed()) return run_index(manifest_path, index_out);
    if (retrieve_cmd->parsed()) {
      return run_retrieve(global, retrieve_query, retrieve_features, retrieve_index, retrieve_m);
    }
    if (register_cmd->parsed()) {
      return run_register(global, reg_query, reg_model, reg_qf, reg_mf, reg_symmetry, reg_k,
                          reg_ransac, split_debug);
    }
    if (evaluate->parsed()) return run_evaluate(global, eval_config, eval_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
