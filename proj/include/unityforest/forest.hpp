#pragma once

#include <string>
#include <vector>

#include "unityforest/data.hpp"
#include "unityforest/hyperparams.hpp"
#include "unityforest/ordering.hpp"
#include "unityforest/splitter.hpp"
#include "unityforest/tree.hpp"

namespace unityforest {

// Unity mode builds each tree from the best of n_cand_trees random candidate
// roots; PlainCart grows conventional CART trees from a single-leaf root and
// serves as the matched-configuration reference forest.
enum class RootMode { Unity, PlainCart };

struct Forest {
  Task task = Task::Classification;
  int num_classes = 0;
  size_t n_train = 0;
  size_t p = 0;
  std::string outcome_name = "y";
  std::vector<CovariateInfo> covariates;
  std::vector<CategoryOrdering> orderings;  // entry per covariate; identity for continuous
  Hyperparams hp;
  RootMode root_mode = RootMode::Unity;
  std::vector<Tree> trees;

  // Encodes a dataset with the stored category orderings after checking that
  // it matches the training schema (names, kinds, category counts, classes).
  EncodedData encode(const Dataset& ds) const;

  // Row in code space (nominal values as category codes 1..J) -> encoded row.
  std::vector<double> encode_row(const std::vector<double>& row) const;
};

Forest train(const Dataset& ds, const Hyperparams& hp, RootMode mode, int workers);

int32_t predict_label(const Forest& forest, const std::vector<double>& row);
std::vector<double> predict_proba(const Forest& forest, const std::vector<double>& row);
double predict_regression(const Forest& forest, const std::vector<double>& row);

// Per-tree prediction used by voting and by the permutation baseline.
int32_t tree_predict_label(const Tree& tree, const std::vector<double>& encoded_row);

struct BatchPrediction {
  std::vector<int32_t> labels;
  std::vector<std::vector<double>> probabilities;
  std::vector<double> values;
};

BatchPrediction predict_dataset(const Forest& forest, const Dataset& ds, int workers);

// Out-of-bag ensemble error: misclassification rate (classification) or
// root-mean-squared error (regression) over observations with at least one
// out-of-bag tree.
double oob_error(const Forest& forest, const Dataset& ds, int workers);

// Covariate rows from a CSV with the model's covariate columns; nominal raw
// values are mapped to category codes, unseen values are an error naming the
// covariate. The outcome column may be absent.
std::vector<std::vector<double>> load_covariate_rows_csv(const Forest& forest,
                                                         const std::string& path);

} // namespace unityforest
