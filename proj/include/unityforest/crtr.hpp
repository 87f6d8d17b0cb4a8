#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unityforest/importance.hpp"

namespace unityforest {

// Trees whose roots contain at least one OOB-top-scoring split on the
// covariate, plus the selected node set itself.
struct BestRootSet {
  size_t covariate = 0;
  std::vector<size_t> tree_ids;                  // distinct, ascending
  std::vector<SplitScoreRecord> selected_nodes;  // OOB-selected splits on the covariate
};

BestRootSet select_best_tree_roots(const std::vector<SplitScoreRecord>& oob_records,
                                   size_t covariate, double prop_best_splits);

// Depth-weighted covariate-mismatch pseudometric over the aligned positions
// of a complete binary tree of depth max_depth_root. Position weights are
// 2^-depth, absent splits count as a reserved "none" covariate, and the sum
// is normalized by the total position weight.
double tree_root_distance(const Tree& a, const Tree& b, int max_depth_root);

// Enrichment of a split covariate in the best tree roots relative to all
// roots: freq_best / (freq_best + freq_all), 0.5 when both are zero.
double covariate_score(double freq_best, double freq_all);

struct CrtrNode {
  size_t node_id = 0;
  int depth = 0;
  bool internal = false;
  int32_t split_covariate = -1;
  std::string split_name;
  double threshold = 0.0;             // encoded scale
  std::vector<double> left_categories;  // raw categories routed left (nominal splits)
  double score = 0.0;                 // covariate score, internal nodes only
  bool top_split = false;
  bool shaded = false;                // neither a top-scoring node nor an ancestor of one
  int32_t left = -1;
  int32_t right = -1;
  int64_t n_inbag = 0;
  std::vector<double> class_proportions;  // classification
  double mean = 0.0;                      // regression
};

// Class-conditional distribution of the covariate at one top-scoring node,
// over the in-bag observations: 25 equal-width bins for continuous
// covariates, raw categories for nominal ones.
struct CovariateNodeSummary {
  size_t node_id = 0;
  bool nominal = false;
  double bin_low = 0.0;
  double bin_width = 0.0;
  std::vector<double> category_values;        // nominal
  std::vector<std::vector<int64_t>> counts;   // [class][bin or category]
};

struct CrtrReport {
  size_t covariate = 0;
  std::string covariate_name;
  bool available = false;
  size_t tree_id = 0;
  std::vector<size_t> best_tree_ids;
  std::vector<CrtrNode> nodes;  // tree-root part only, node_id 0 first
  std::vector<CovariateNodeSummary> top_node_summaries;
};

// Medoid of the best tree roots under tree_root_distance (ties: lowest tree
// id), annotated with covariate scores, top-split markers and in-bag node
// summaries. An empty best-root set yields available = false.
CrtrReport select_crtr(const Forest& forest, const EncodedData& data,
                       const BestRootSet& best_roots);

std::string crtr_report_to_json(const CrtrReport& report);
std::string crtr_report_to_dot(const CrtrReport& report);

// Writes <out_dir>/crtr_<name>.json and <out_dir>/crtr_<name>.dot.
void export_crtr(const CrtrReport& report, const std::string& out_dir);

} // namespace unityforest
