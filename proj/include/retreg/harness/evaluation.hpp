#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "retreg/geometry/point_cloud.hpp"
#include "retreg/registration/symmetry_register.hpp"
#include "retreg/retrieval/database.hpp"

namespace retreg {

// Fraction of the first m retrieved ids found in the positive set.
double precision_at_m(std::span<const std::string> retrieved,
                      std::span<const std::string> positive_set, int m);

// Gap between the retrieved top-1 alignment quality and the oracle's:
// |chamfer(query, retrieved) - chamfer(query, oracle)|.
double top1_cd(const PointCloud& query, const PointCloud& retrieved_top1,
               const PointCloud& oracle_top1);

struct EvalQuery {
  std::string id;
  std::string cloud_path;
  std::string feature_path;     // optional
  std::string annotated_model;  // optional; required by the annotated modes
};

struct EvalConfig {
  std::string database;  // persisted index directory or manifest path
  std::vector<EvalQuery> queries;
  uint64_t seed = 0;
  bool apply_random_rotation = true;
  std::string registration_target = "retrieved";  // or "annotated"
  std::string positives = "chamfer";              // or "annotated"
  int precision_m = 0;                            // 0 selects max(1, round(0.1 * #queries))
  bool exclude_self = true;     // drop the query's own id from rankings
  int knn_k = 5;
  RansacParams ransac;
  SplitParams split;
  double positive_tau = 0.1;    // rank percentile for chamfer positives
  double positive_delta = std::numeric_limits<double>::infinity();  // absolute CD cutoff
  std::string base_dir;         // paths resolve against this directory
};

EvalConfig load_eval_config(const std::string& path);

struct EvalCase {
  std::string query_id;
  std::string retrieved_id;
  double embedding_distance = 0.0;
  double precision = 0.0;  // per-query precision@M
  double top1_cd = 0.0;
  std::string target_id;   // model registered against
  std::string hypothesis;  // winning hypothesis of the symmetry pipeline
  double rre_sym = 0.0, rte_sym = 0.0, scd_sym = 0.0;
  double rre_plain = 0.0, rte_plain = 0.0, scd_plain = 0.0;
};

struct EvalReport {
  std::vector<EvalCase> cases;
  int precision_m = 0;
  std::array<double, 3> rre_thresholds_deg{5.0, 15.0, 45.0};
  std::array<double, 3> rte_thresholds{0.03, 0.05, 0.10};
  std::array<double, 3> rre_cdf_sym{}, rre_cdf_plain{};
  std::array<double, 3> rte_cdf_sym{}, rte_cdf_plain{};
  double mean_precision = 0.0;
  double mean_top1_cd = 0.0;
  double median_rre_sym_deg = 0.0, median_rre_plain_deg = 0.0;
  double mean_scd_sym = 0.0, mean_scd_plain = 0.0;
  std::vector<double> sorted_rre_sym_deg, sorted_rre_plain_deg;  // CDF columns
};

// Aggregates are a pure function of the per-case records.
void compute_aggregates(EvalReport& report);

EvalReport run_evaluation(const EvalConfig& config);
EvalReport run_evaluation_file(const std::string& config_path);

std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace retreg
