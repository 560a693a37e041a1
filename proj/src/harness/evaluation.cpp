#include "retreg/harness/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "retreg/core/rng.hpp"
#include "retreg/features/crsf.hpp"
#include "retreg/features/fpfh.hpp"
#include "retreg/features/matching.hpp"
#include "retreg/geometry/distances.hpp"
#include "retreg/io/cloud_io.hpp"
#include "retreg/registration/metrics.hpp"

namespace retreg {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

double precision_at_m(std::span<const std::string> retrieved,
                      std::span<const std::string> positive_set, int m) {
  if (m < 1) fail(Errc::invalid_argument, "precision@M needs m >= 1");
  if (static_cast<int>(retrieved.size()) < m) {
    fail(Errc::invalid_argument, "precision@M needs at least m retrieved ids");
  }
  int hits = 0;
  for (int i = 0; i < m; ++i) {
    if (std::find(positive_set.begin(), positive_set.end(), retrieved[i]) != positive_set.end()) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

double top1_cd(const PointCloud& query, const PointCloud& retrieved_top1,
               const PointCloud& oracle_top1) {
  return std::abs(chamfer(query, retrieved_top1) - chamfer(query, oracle_top1));
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

EvalConfig load_eval_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::missing_file, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();

  ordered_json doc;
  try {
    doc = ordered_json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::parse_error, "config '" + path + "': " + e.what());
  }

  EvalConfig config;
  config.base_dir = fs::path(path).parent_path().string();
  if (!doc.contains("database") || !doc.contains("queries")) {
    fail(Errc::parse_error, "config '" + path + "' must name a database and queries");
  }
  config.database = doc["database"].get<std::string>();

  // "queries" is either an inline array or the path of a query-list file
  // (as emitted by the synth command); relative query paths then resolve
  // against that file's directory.
  ordered_json query_list = doc["queries"];
  std::string query_base;
  if (query_list.is_string()) {
    const std::string list_path = resolve(config.base_dir, query_list.get<std::string>());
    std::ifstream list_in(list_path, std::ios::binary);
    if (!list_in) fail(Errc::missing_file, "cannot open query list '" + list_path + "'");
    std::ostringstream list_ss;
    list_ss << list_in.rdbuf();
    ordered_json list_doc;
    try {
      list_doc = ordered_json::parse(list_ss.str());
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::parse_error, "query list '" + list_path + "': " + e.what());
    }
    query_list = list_doc.is_array() ? list_doc : list_doc.value("queries", ordered_json::array());
    query_base = fs::path(list_path).parent_path().string();
  }
  if (!query_list.is_array()) fail(Errc::parse_error, "config '" + path + "' queries must be an array");
  for (const auto& q : query_list) {
    EvalQuery query;
    if (!q.contains("id") || !q.contains("cloud_path")) {
      fail(Errc::parse_error, "query entry without id/cloud_path in '" + path + "'");
    }
    query.id = q["id"].get<std::string>();
    query.cloud_path = q["cloud_path"].get<std::string>();
    query.feature_path = q.value("feature_path", std::string());
    query.annotated_model = q.value("annotated_model", std::string());
    if (!query_base.empty()) {
      query.cloud_path = resolve(query_base, query.cloud_path);
      if (!query.feature_path.empty()) query.feature_path = resolve(query_base, query.feature_path);
    }
    config.queries.push_back(std::move(query));
  }
  if (config.queries.empty()) fail(Errc::invalid_argument, "config '" + path + "' lists no queries");

  config.seed = doc.value("seed", 0ull);
  config.apply_random_rotation = doc.value("apply_random_rotation", true);
  config.registration_target = doc.value("registration_target", std::string("retrieved"));
  config.positives = doc.value("positives", std::string("chamfer"));
  config.precision_m = doc.value("precision_m", 0);
  config.exclude_self = doc.value("exclude_self", true);
  config.knn_k = doc.value("knn_k", 5);
  if (doc.contains("ransac")) {
    const auto& r = doc["ransac"];
    config.ransac.iterations = r.value("iterations", config.ransac.iterations);
    config.ransac.inlier_threshold = r.value("inlier_threshold", config.ransac.inlier_threshold);
    config.ransac.early_exit_inlier_ratio =
        r.value("early_exit_inlier_ratio", config.ransac.early_exit_inlier_ratio);
  }
  if (doc.contains("split")) {
    const auto& s = doc["split"];
    config.split.n_samples = s.value("n_samples", config.split.n_samples);
    config.split.k_neighbors = s.value("k_neighbors", config.split.k_neighbors);
  }
  if (doc.contains("positive_tau")) config.positive_tau = doc["positive_tau"].get<double>();
  if (doc.contains("positive_delta")) config.positive_delta = doc["positive_delta"].get<double>();

  if (config.registration_target != "retrieved" && config.registration_target != "annotated") {
    fail(Errc::invalid_argument, "registration_target must be 'retrieved' or 'annotated'");
  }
  if (config.positives != "chamfer" && config.positives != "annotated") {
    fail(Errc::invalid_argument, "positives must be 'chamfer' or 'annotated'");
  }
  return config;
}

void compute_aggregates(EvalReport& report) {
  const auto fraction_within = [&](auto extract, double limit) {
    int count = 0;
    for (const EvalCase& c : report.cases) {
      if (extract(c) <= limit) ++count;
    }
    return report.cases.empty() ? 0.0 : static_cast<double>(count) / report.cases.size();
  };

  for (size_t t = 0; t < report.rre_thresholds_deg.size(); ++t) {
    const double limit = radians(report.rre_thresholds_deg[t]);
    report.rre_cdf_sym[t] = fraction_within([](const EvalCase& c) { return c.rre_sym; }, limit);
    report.rre_cdf_plain[t] = fraction_within([](const EvalCase& c) { return c.rre_plain; }, limit);
  }
  for (size_t t = 0; t < report.rte_thresholds.size(); ++t) {
    const double limit = report.rte_thresholds[t];
    report.rte_cdf_sym[t] = fraction_within([](const EvalCase& c) { return c.rte_sym; }, limit);
    report.rte_cdf_plain[t] = fraction_within([](const EvalCase& c) { return c.rte_plain; }, limit);
  }

  double precision_sum = 0.0, top1_sum = 0.0, scd_sym_sum = 0.0, scd_plain_sum = 0.0;
  std::vector<double> rre_sym, rre_plain;
  for (const EvalCase& c : report.cases) {
    precision_sum += c.precision;
    top1_sum += c.top1_cd;
    scd_sym_sum += c.scd_sym;
    scd_plain_sum += c.scd_plain;
    rre_sym.push_back(degrees(c.rre_sym));
    rre_plain.push_back(degrees(c.rre_plain));
  }
  const double n = report.cases.empty() ? 1.0 : static_cast<double>(report.cases.size());
  report.mean_precision = precision_sum / n;
  report.mean_top1_cd = top1_sum / n;
  report.mean_scd_sym = scd_sym_sum / n;
  report.mean_scd_plain = scd_plain_sum / n;
  report.median_rre_sym_deg = median(rre_sym);
  report.median_rre_plain_deg = median(rre_plain);

  std::sort(rre_sym.begin(), rre_sym.end());
  std::sort(rre_plain.begin(), rre_plain.end());
  report.sorted_rre_sym_deg = std::move(rre_sym);
  report.sorted_rre_plain_deg = std::move(rre_plain);
}

EvalReport run_evaluation(const EvalConfig& config) {
  const std::string db_path = resolve(config.base_dir, config.database);
  const ModelDatabase db = fs::exists(fs::path(db_path) / "index.json")
                               ? load_database(db_path)
                               : build_database(db_path);

  const int n_queries = static_cast<int>(config.queries.size());
  const int m = config.precision_m > 0
                    ? config.precision_m
                    : std::max(1, static_cast<int>(std::lround(0.1 * n_queries)));

  std::vector<EvalCase> cases(n_queries);
  std::vector<std::exception_ptr> errors(n_queries);

#pragma omp parallel for schedule(dynamic)
  for (int qi = 0; qi < n_queries; ++qi) {
    try {
      const EvalQuery& q = config.queries[qi];
      EvalCase record;
      record.query_id = q.id;

      PointCloud raw = read_cloud(resolve(config.base_dir, q.cloud_path), q.id);
      auto [canonical, annotation] = normalize_cloud(raw);
      FeatureSet features = q.feature_path.empty()
                                ? extract_fpfh(canonical)
                                : load_features(resolve(config.base_dir, q.feature_path),
                                                canonical.size());

      Pose gt_pose;
      PointCloud query_cloud = canonical;
      if (config.apply_random_rotation) {
        SplitMix64 rot_rng(mix_seed(config.seed, 0x9000 + static_cast<uint64_t>(qi)));
        gt_pose = Pose(random_rotation(rot_rng), Eigen::Vector3d::Zero());
        query_cloud = apply_pose(canonical, gt_pose);
      }

      // Retrieval over the full database.
      const Embedding embedding = pooled_embedding(features, db.embedding_dim());
      auto ranking = retrieve(embedding, db, db.size());
      if (config.exclude_self) {
        std::erase_if(ranking, [&](const auto& r) { return r.first == q.id; });
      }
      if (ranking.empty()) fail(Errc::invalid_argument, "ranking is empty for query '" + q.id + "'");
      record.retrieved_id = ranking.front().first;
      record.embedding_distance = ranking.front().second;

      // Chamfer distances against the database drive positives and top-1 CD.
      std::vector<std::pair<double, std::string>> cd(db.size());
      for (int i = 0; i < db.size(); ++i) {
        cd[i] = {chamfer(canonical, db.entry(i).cloud), db.entry(i).id};
      }
      std::vector<std::pair<double, std::string>> cd_sorted = cd;
      std::sort(cd_sorted.begin(), cd_sorted.end());
      if (config.exclude_self) {
        std::erase_if(cd_sorted, [&](const auto& r) { return r.second == q.id; });
      }

      std::vector<std::string> positives;
      if (config.positives == "annotated") {
        if (q.annotated_model.empty()) {
          fail(Errc::invalid_argument, "query '" + q.id + "' lacks annotated_model");
        }
        positives.push_back(q.annotated_model);
      } else {
        // Desk-scale databases can make tau * |db| < 1; the Chamfer argmin
        // always qualifies so the positive set cannot be empty by rounding.
        const double limit = std::max(1.0, config.positive_tau * static_cast<double>(db.size()));
        for (size_t r = 0; r < cd_sorted.size(); ++r) {
          if (static_cast<double>(r + 1) <= limit && cd_sorted[r].first <= config.positive_delta) {
            positives.push_back(cd_sorted[r].second);
          }
        }
      }

      std::vector<std::string> retrieved_ids;
      retrieved_ids.reserve(ranking.size());
      for (const auto& r : ranking) retrieved_ids.push_back(r.first);
      record.precision = precision_at_m(retrieved_ids, positives, std::min<int>(m, retrieved_ids.size()));

      const int oracle_idx = db.find(cd_sorted.front().second);
      const int retrieved_idx = db.find(record.retrieved_id);
      record.top1_cd = top1_cd(canonical, db.entry(retrieved_idx).cloud, db.entry(oracle_idx).cloud);

      // Registration target: retrieved top-1 or the annotated model.
      std::string target_id = record.retrieved_id;
      if (config.registration_target == "annotated") {
        if (q.annotated_model.empty()) {
          fail(Errc::invalid_argument, "query '" + q.id + "' lacks annotated_model");
        }
        target_id = q.annotated_model;
      }
      const int target_idx = db.find(target_id);
      if (target_idx < 0) fail(Errc::invalid_argument, "unknown target model '" + target_id + "'");
      const ModelEntry& target = db.entry(target_idx);
      record.target_id = target_id;

      SymmetryRegisterParams params;
      params.knn_k = config.knn_k;
      params.ransac = config.ransac;
      params.ransac.seed = mix_seed(config.seed, 0xa000 + static_cast<uint64_t>(qi));
      params.split = config.split;
      params.split.seed = mix_seed(config.seed, 0xb000 + static_cast<uint64_t>(qi));

      const RegistrationResult sym = symmetry_aware_register(
          query_cloud, features, target.cloud, target.features, target.symmetry_classes, params);
      record.hypothesis = sym.hypothesis_label;
      record.rre_sym = rre(sym.pose, gt_pose);
      record.rte_sym = rte(sym.pose, gt_pose);
      record.scd_sym = sym.alignment_scd;

      const int k = std::min(config.knn_k, target.cloud.size());
      const RegistrationResult plain = ransac_register(
          query_cloud, target.cloud, knn_match(features, target.features, k), params.ransac);
      record.rre_plain = rre(plain.pose, gt_pose);
      record.rte_plain = rte(plain.pose, gt_pose);
      record.scd_plain = plain.alignment_scd;

      cases[qi] = std::move(record);
    } catch (...) {
      errors[qi] = std::current_exception();
    }
  }
  for (int qi = 0; qi < n_queries; ++qi) {
    if (errors[qi]) std::rethrow_exception(errors[qi]);
  }

  EvalReport report;
  report.cases = std::move(cases);
  report.precision_m = m;
  compute_aggregates(report);
  return report;
}

EvalReport run_evaluation_file(const std::string& config_path) {
  return run_evaluation(load_eval_config(config_path));
}

std::string report_to_json(const EvalReport& report) {
  ordered_json doc;
  doc["precision_m"] = report.precision_m;

  ordered_json agg;
  agg["rre_thresholds_deg"] = report.rre_thresholds_deg;
  agg["rre_cdf_sym"] = report.rre_cdf_sym;
  agg["rre_cdf_plain"] = report.rre_cdf_plain;
  agg["rte_thresholds"] = report.rte_thresholds;
  agg["rte_cdf_sym"] = report.rte_cdf_sym;
  agg["rte_cdf_plain"] = report.rte_cdf_plain;
  agg["mean_precision_at_m"] = report.mean_precision;
  agg["mean_top1_cd"] = report.mean_top1_cd;
  agg["median_rre_sym_deg"] = report.median_rre_sym_deg;
  agg["median_rre_plain_deg"] = report.median_rre_plain_deg;
  agg["mean_scd_sym"] = report.mean_scd_sym;
  agg["mean_scd_plain"] = report.mean_scd_plain;
  doc["aggregates"] = std::move(agg);

  ordered_json cdf;
  cdf["rre_sym_deg_sorted"] = report.sorted_rre_sym_deg;
  cdf["rre_plain_deg_sorted"] = report.sorted_rre_plain_deg;
  doc["cdf"] = std::move(cdf);

  ordered_json cases = ordered_json::array();
  for (const EvalCase& c : report.cases) {
    ordered_json jc;
    jc["query_id"] = c.query_id;
    jc["retrieved_id"] = c.retrieved_id;
    jc["embedding_distance"] = c.embedding_distance;
    jc["precision"] = c.precision;
    jc["top1_cd"] = c.top1_cd;
    jc["target_id"] = c.target_id;
    jc["hypothesis"] = c.hypothesis;
    jc["rre_sym"] = c.rre_sym;
    jc["rte_sym"] = c.rte_sym;
    jc["scd_sym"] = c.scd_sym;
    jc["rre_plain"] = c.rre_plain;
    jc["rte_plain"] = c.rte_plain;
    jc["scd_plain"] = c.scd_plain;
    cases.push_back(std::move(jc));
  }
  doc["cases"] = std::move(cases);
  return doc.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  out << "cases: " << report.cases.size() << "  precision_m: " << report.precision_m << "\n";
  out << "method      RRE<=5deg  RRE<=15deg  RRE<=45deg  RTE<=0.03  RTE<=0.05  RTE<=0.10  mean-SCD\n";
  const auto row = [&](const char* name, const std::array<double, 3>& rre_cdf,
                       const std::array<double, 3>& rte_cdf, double mean_scd) {
    out << name;
    for (double v : rre_cdf) out << "  " << format_fixed(v, 6) << " ";
    for (double v : rte_cdf) out << " " << format_fixed(v, 6) << " ";
    out << " " << format_fixed(mean_scd, 6) << "\n";
  };
  row("plain     ", report.rre_cdf_plain, report.rte_cdf_plain, report.mean_scd_plain);
  row("symmetry  ", report.rre_cdf_sym, report.rte_cdf_sym, report.mean_scd_sym);
  out << "retrieval   Precision@" << report.precision_m << ": "
      << format_fixed(report.mean_precision, 6)
      << "  mean-Top1-CD: " << format_fixed(report.mean_top1_cd, 6) << "\n";
  out << "median RRE (deg)  symmetry: " << format_fixed(report.median_rre_sym_deg, 4)
      << "  plain: " << format_fixed(report.median_rre_plain_deg, 4) << "\n";
  return out.str();
}

}  // namespace retreg
