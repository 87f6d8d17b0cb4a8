#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unityforest/forest.hpp"
#include "unityforest/metrics.hpp"

namespace unityforest {

struct MetricReport {
  int repetition = 0;
  int fold = 0;
  double brier = 0.0;
  double auc = 0.0;
  double acc = 0.0;
};

struct LearnerConfig {
  Hyperparams hp;
  RootMode mode = RootMode::Unity;
};

// Stratified fold assignment: classes are shuffled and dealt round-robin, so
// per-class fold sizes differ by at most one. Returns fold id per row.
std::vector<int> stratified_folds(const std::vector<int32_t>& labels, int folds, uint64_t seed);

// Repeated stratified k-fold cross-validation for binary classification;
// fold assignment depends only on (seed, repetition).
std::vector<MetricReport> cross_validate(const Dataset& ds, const LearnerConfig& learner,
                                         int folds, int repeats, uint64_t seed, int workers);

struct BenchmarkDataset {
  std::string name;
  std::string csv_path;
  std::string schema_path;
};

struct BenchmarkRow {
  std::string dataset;
  std::string method;
  double brier = 0.0;
  double auc = 0.0;
  double acc = 0.0;
  bool failed = false;
  std::string error;
};

struct BenchmarkSummaryRow {
  std::string metric;
  int better = 0;
  int equal = 0;
  int worse = 0;
  double p_value = 1.0;
  int n_effective = 0;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;           // one per (dataset, method)
  std::vector<BenchmarkSummaryRow> summary;  // per metric, first method vs second
};

// Runs both methods over every dataset under the same CV folds and counts how
// often the first method is better, equal, or worse per metric, with an exact
// binomial sign test over the non-tied datasets. Per-dataset failures are
// recorded and the run continues.
BenchmarkResult run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                              const LearnerConfig& first, const LearnerConfig& second,
                              const std::string& first_name, const std::string& second_name,
                              int folds, int repeats, uint64_t seed, int workers);

} // namespace unityforest
