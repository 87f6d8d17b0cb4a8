#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>

#include "test_util.hpp"
#include "unityforest/cv.hpp"
#include "unityforest/rng.hpp"

using namespace unityforest;
using namespace test_util;

namespace {

Dataset noisy_signal_dataset(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  std::vector<int32_t> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const bool second = rng.uniform_double() < 0.5;
    labels[i] = second ? 2 : 1;
    cols[0][i] = rng.normal() + (second ? 1.5 : 0.0);
    cols[1][i] = rng.normal();
    cols[2][i] = rng.normal();
  }
  return make_classification(std::move(cols), std::move(labels));
}

LearnerConfig quick_learner(RootMode mode) {
  LearnerConfig learner;
  learner.hp.num_trees = 30;
  learner.hp.n_cand_trees = 15;
  learner.hp.prop_var = 0.0;  // resolve per dataset
  learner.hp.mtry = 0;
  learner.hp.seed = 5;
  learner.mode = mode;
  return learner;
}

} // namespace

TEST_CASE("stratified folds balance every class") {
  std::vector<int32_t> labels;
  for (int k = 0; k < 23; ++k) labels.push_back(1);
  for (int k = 0; k < 41; ++k) labels.push_back(2);
  const std::vector<int> fold = stratified_folds(labels, 5, 99);
  std::map<int32_t, std::map<int, int>> count;
  for (size_t i = 0; i < labels.size(); ++i) ++count[labels[i]][fold[i]];
  for (const auto& [cls, per_fold] : count) {
    int lo = INT32_MAX, hi = 0;
    for (int f = 0; f < 5; ++f) {
      auto it = per_fold.find(f);
      const int c = it == per_fold.end() ? 0 : it->second;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("fold assignment is deterministic and a partition") {
  std::vector<int32_t> labels(60);
  for (size_t i = 0; i < 60; ++i) labels[i] = i % 2 == 0 ? 1 : 2;
  const auto a = stratified_folds(labels, 5, 7);
  const auto b = stratified_folds(labels, 5, 7);
  CHECK(a == b);
  for (const int f : a) {
    CHECK(f >= 0);
    CHECK(f < 5);
  }
}

TEST_CASE("a class smaller than the fold count is an error") {
  std::vector<int32_t> labels = {1, 1, 1, 2, 2, 2, 2, 2};
  CHECK_THROWS_AS(stratified_folds(labels, 5, 1), ValidationError);
}

TEST_CASE("cross validation produces one report per fold and repetition") {
  const Dataset ds = noisy_signal_dataset(120, 3);
  const auto reports = cross_validate(ds, quick_learner(RootMode::Unity), 4, 2, 11, 2);
  CHECK(reports.size() == 8);
  for (const MetricReport& r : reports) {
    CHECK(r.brier >= 0.0);
    CHECK(r.auc >= 0.0);
    CHECK(r.auc <= 1.0);
    CHECK(r.acc >= 0.0);
    CHECK(r.acc <= 1.0);
  }
  const auto again = cross_validate(ds, quick_learner(RootMode::Unity), 4, 2, 11, 1);
  for (size_t k = 0; k < reports.size(); ++k) {
    CHECK(reports[k].brier == again[k].brier);
    CHECK(reports[k].auc == again[k].auc);
    CHECK(reports[k].acc == again[k].acc);
  }
}

TEST_CASE("benchmark with identical methods reports all ties") {
  const Dataset ds = noisy_signal_dataset(90, 17);
  const auto dir = std::filesystem::temp_directory_path() / "ufo_bench_ties";
  std::filesystem::create_directories(dir);
  write_dataset_csv(ds, (dir / "d.csv").string());
  {
    std::ofstream out(dir / "d.schema.json");
    out << schema_of(ds).to_json();
  }
  std::vector<BenchmarkDataset> datasets = {
      {"d", (dir / "d.csv").string(), (dir / "d.schema.json").string()}};
  const LearnerConfig learner = quick_learner(RootMode::Unity);
  const BenchmarkResult result =
      run_benchmark(datasets, learner, learner, "a", "b", 3, 1, 21, 2);
  REQUIRE(result.summary.size() == 3);
  for (const auto& row : result.summary) {
    CHECK(row.equal == 1);
    CHECK(row.better == 0);
    CHECK(row.worse == 0);
    CHECK(row.n_effective == 0);
    CHECK(row.p_value == 1.0);
  }
}

TEST_CASE("benchmark continues past per-dataset failures") {
  const Dataset ds = noisy_signal_dataset(90, 18);
  const auto dir = std::filesystem::temp_directory_path() / "ufo_bench_fail";
  std::filesystem::create_directories(dir);
  write_dataset_csv(ds, (dir / "ok.csv").string());
  {
    std::ofstream out(dir / "ok.schema.json");
    out << schema_of(ds).to_json();
  }
  std::vector<BenchmarkDataset> datasets = {
      {"missing", (dir / "nope.csv").string(), (dir / "ok.schema.json").string()},
      {"ok", (dir / "ok.csv").string(), (dir / "ok.schema.json").string()}};
  const BenchmarkResult result = run_benchmark(datasets, quick_learner(RootMode::Unity),
                                               quick_learner(RootMode::PlainCart), "ufo",
                                               "reference-rf", 3, 1, 4, 2);
  bool failure_row = false;
  for (const auto& row : result.rows) {
    if (row.failed) failure_row = true;
  }
  CHECK(failure_row);
  for (const auto& row : result.summary) {
    CHECK(row.better + row.equal + row.worse == 1);  // only the good dataset
  }
}

TEST_CASE("both methods fit separable data well") {
  Rng rng(88);
  const size_t n = 140;
  std::vector<std::vector<double>> cols(2, std::vector<double>(n));
  std::vector<int32_t> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const bool second = i % 2 == 1;
    labels[i] = second ? 2 : 1;
    cols[0][i] = (second ? 4.0 : -4.0) + rng.normal() * 0.25;
    cols[1][i] = rng.normal();
  }
  const Dataset ds = make_classification(std::move(cols), std::move(labels));
  for (const RootMode mode : {RootMode::Unity, RootMode::PlainCart}) {
    const auto reports = cross_validate(ds, quick_learner(mode), 5, 1, 31, 2);
    double acc = 0.0;
    for (const auto& r : reports) acc += r.acc;
    acc /= static_cast<double>(reports.size());
    CHECK(acc > 0.95);
  }
}
