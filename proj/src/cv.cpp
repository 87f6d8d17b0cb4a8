#include "unityforest/cv.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "unityforest/rng.hpp"

namespace unityforest {

std::vector<int> stratified_folds(const std::vector<int32_t>& labels, int folds, uint64_t seed) {
  if (folds < 2) throw InvalidArgument("stratified_folds: need at least 2 folds");
  std::map<int32_t, std::vector<size_t>> by_class;
  for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [cls, rows] : by_class) {
    if (rows.size() < static_cast<size_t>(folds)) {
      throw ValidationError("class " + std::to_string(cls) + " has " +
                            std::to_string(rows.size()) + " members, fewer than " +
                            std::to_string(folds) + " folds");
    }
  }
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  for (auto& [cls, rows] : by_class) {
    rng.shuffle(rows);
    for (size_t k = 0; k < rows.size(); ++k) fold[rows[k]] = static_cast<int>(k % folds);
  }
  return fold;
}

std::vector<MetricReport> cross_validate(const Dataset& ds, const LearnerConfig& learner,
                                         int folds, int repeats, uint64_t seed, int workers) {
  if (ds.task != Task::Classification || ds.num_classes != 2) {
    throw ValidationError("cross_validate requires a binary classification dataset");
  }
  std::vector<MetricReport> reports;
  for (int rep = 0; rep < repeats; ++rep) {
    const std::vector<int> fold =
        stratified_folds(ds.labels, folds, derive_seed(seed, rng_tag::kCvFolds,
                                                       static_cast<uint64_t>(rep)));
    for (int f = 0; f < folds; ++f) {
      std::vector<size_t> train_rows, test_rows;
      for (size_t i = 0; i < ds.n; ++i) {
        (fold[i] == f ? test_rows : train_rows).push_back(i);
      }
      const Dataset train_ds = ds.subset(train_rows);
      const Dataset test_ds = ds.subset(test_rows);
      Hyperparams hp = resolve_hyperparams(learner.hp, ds.p, ds.task);
      hp.seed = derive_seed(learner.hp.seed, rng_tag::kReplicate, static_cast<uint64_t>(rep),
                            static_cast<uint64_t>(f));
      const Forest forest = train(train_ds, hp, learner.mode, workers);
      const BatchPrediction pred = predict_dataset(forest, test_ds, workers);
      std::vector<double> scores(test_ds.n);
      for (size_t i = 0; i < test_ds.n; ++i) scores[i] = pred.probabilities[i][1];
      MetricReport report;
      report.repetition = rep;
      report.fold = f;
      report.brier = brier(pred.probabilities, test_ds.labels);
      report.auc = auc(scores, test_ds.labels);
      report.acc = accuracy(pred.labels, test_ds.labels);
      reports.push_back(report);
    }
  }
  return reports;
}

namespace {

struct MeanMetrics {
  double brier = 0.0;
  double auc = 0.0;
  double acc = 0.0;
};

MeanMetrics mean_of(const std::vector<MetricReport>& reports) {
  MeanMetrics m;
  for (const MetricReport& r : reports) {
    m.brier += r.brier;
    m.auc += r.auc;
    m.acc += r.acc;
  }
  const double n = static_cast<double>(reports.size());
  m.brier /= n;
  m.auc /= n;
  m.acc /= n;
  return m;
}

} // namespace

BenchmarkResult run_benchmark(const std::vector<BenchmarkDataset>& datasets,
                              const LearnerConfig& first, const LearnerConfig& second,
                              const std::string& first_name, const std::string& second_name,
                              int folds, int repeats, uint64_t seed, int workers) {
  if (datasets.empty()) throw InvalidArgument("run_benchmark: no datasets");
  BenchmarkResult result;
  struct Outcome {
    bool ok = false;
    MeanMetrics a, b;
  };
  std::vector<Outcome> outcomes;
  for (const BenchmarkDataset& bd : datasets) {
    Outcome outcome;
    try {
      const SchemaDecl schema = SchemaDecl::from_json([&] {
        std::ifstream in(bd.schema_path, std::ios::binary);
        if (!in) throw IoError("cannot open file: " + bd.schema_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
      }());
      const Dataset ds = load_dataset_csv(bd.csv_path, schema);
      outcome.a = mean_of(cross_validate(ds, first, folds, repeats, seed, workers));
      outcome.b = mean_of(cross_validate(ds, second, folds, repeats, seed, workers));
      outcome.ok = true;
      BenchmarkRow row_a{bd.name, first_name, outcome.a.brier, outcome.a.auc, outcome.a.acc,
                         false, ""};
      BenchmarkRow row_b{bd.name, second_name, outcome.b.brier, outcome.b.auc, outcome.b.acc,
                         false, ""};
      result.rows.push_back(row_a);
      result.rows.push_back(row_b);
    } catch (const Error& e) {
      BenchmarkRow row{bd.name, "", 0.0, 0.0, 0.0, true, e.what()};
      result.rows.push_back(row);
    }
    outcomes.push_back(outcome);
  }

  auto summarize = [&](const std::string& metric, auto getter, bool lower_is_better) {
    BenchmarkSummaryRow row;
    row.metric = metric;
    for (const Outcome& o : outcomes) {
      if (!o.ok) continue;
      const double a = getter(o.a);
      const double b = getter(o.b);
      if (a == b) {
        ++row.equal;
      } else if ((a < b) == lower_is_better) {
        ++row.better;
      } else {
        ++row.worse;
      }
    }
    row.n_effective = row.better + row.worse;
    row.p_value = row.n_effective > 0 ? binomial_sign_test(row.better, row.worse) : 1.0;
    result.summary.push_back(row);
  };
  summarize("brier", [](const MeanMetrics& m) { return m.brier; }, true);
  summarize("auc", [](const MeanMetrics& m) { return m.auc; }, false);
  summarize("acc", [](const MeanMetrics& m) { return m.acc; }, false);
  return result;
}

} // namespace unityforest
