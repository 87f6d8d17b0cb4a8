#include "unityforest/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "unityforest/parallel.hpp"

namespace unityforest {

namespace {

void check_schema_match(const Forest& forest, const Dataset& ds) {
  if (ds.p != forest.p) {
    throw ValidationError("model/data schema mismatch: expected " + std::to_string(forest.p) +
                          " covariates, got " + std::to_string(ds.p));
  }
  for (size_t c = 0; c < ds.p; ++c) {
    const auto& a = forest.covariates[c];
    const auto& b = ds.covariates[c];
    if (a.name != b.name || a.kind != b.kind || a.num_categories != b.num_categories) {
      throw ValidationError("model/data schema mismatch at covariate '" + b.name + "'");
    }
  }
  if (ds.task != forest.task) {
    throw ValidationError("model/data schema mismatch: task differs");
  }
  if (forest.task == Task::Classification && ds.num_classes != forest.num_classes) {
    throw ValidationError("model/data schema mismatch: class count differs");
  }
}

} // namespace

EncodedData Forest::encode(const Dataset& ds) const {
  check_schema_match(*this, ds);
  EncodedData data;
  data.n = ds.n;
  data.p = ds.p;
  data.task = ds.task;
  data.num_classes = ds.num_classes;
  data.label = ds.labels;
  data.y = ds.y;
  data.col.resize(ds.p);
  for (size_t c = 0; c < ds.p; ++c) {
    if (covariates[c].kind == CovariateKind::Continuous || orderings[c].is_identity()) {
      data.col[c] = ds.columns[c];
    } else {
      data.col[c].resize(ds.n);
      for (size_t i = 0; i < ds.n; ++i) {
        data.col[c][i] = static_cast<double>(orderings[c].rank(static_cast<int>(ds.columns[c][i])));
      }
    }
  }
  return data;
}

std::vector<double> Forest::encode_row(const std::vector<double>& row) const {
  if (row.size() != p) {
    throw ValidationError("prediction row has " + std::to_string(row.size()) +
                          " values, expected " + std::to_string(p));
  }
  std::vector<double> out(row);
  for (size_t c = 0; c < p; ++c) {
    if (covariates[c].kind != CovariateKind::Nominal) continue;
    const int code = static_cast<int>(row[c]);
    if (static_cast<double>(code) != row[c] || code < 1 ||
        code > covariates[c].num_categories) {
      throw ValidationError("unseen category " + format_double(row[c]) + " for covariate '" +
                            covariates[c].name + "'");
    }
    out[c] = static_cast<double>(orderings[c].rank(code));
  }
  return out;
}

Forest train(const Dataset& ds, const Hyperparams& hp, RootMode mode, int workers) {
  hp.validate(ds.p);
  const size_t inbag_size = static_cast<size_t>(std::floor(hp.fract_n * static_cast<double>(ds.n)));
  if (inbag_size < 2) {
    throw ValidationError("training requires at least 2 in-bag observations (n = " +
                          std::to_string(ds.n) + ", fract_n = " + format_double(hp.fract_n) + ")");
  }

  Forest forest;
  forest.task = ds.task;
  forest.num_classes = ds.num_classes;
  forest.n_train = ds.n;
  forest.p = ds.p;
  forest.outcome_name = ds.outcome_name;
  forest.covariates = ds.covariates;
  forest.hp = hp;
  forest.root_mode = mode;

  // Category orderings are computed once on the full training data so split
  // thresholds stay comparable across trees.
  forest.orderings.resize(ds.p);
  for (size_t c = 0; c < ds.p; ++c) {
    if (ds.covariates[c].kind == CovariateKind::Nominal) {
      forest.orderings[c] = order_categories(c, ds.columns[c], ds.covariates[c].num_categories,
                                             ds.labels, ds.num_classes, ds.y, ds.task);
    } else {
      forest.orderings[c].covariate = c;
    }
  }

  const EncodedData data = forest.encode(ds);
  const size_t subset_size = root_subset_size(hp, ds.p);
  forest.trees.resize(static_cast<size_t>(hp.num_trees));

  parallel_for(hp.num_trees, workers, [&](int64_t t) {
    const uint64_t ti = static_cast<uint64_t>(t);
    Rng rng_sample(derive_seed(hp.seed, rng_tag::kInbagSample, ti));
    std::vector<size_t> inbag = rng_sample.sample_without_replacement(ds.n, inbag_size);

    TreeRoot best_root;
    if (mode == RootMode::Unity) {
      Rng rng_subset(derive_seed(hp.seed, rng_tag::kRootSubset, ti));
      const std::vector<size_t> subset =
          rng_subset.sample_without_replacement(ds.p, subset_size);
      const MidpointCache cache = build_midpoint_cache(data, inbag, subset);
      double best_score = -1.0;
      for (int cand = 0; cand < hp.n_cand_trees; ++cand) {
        Rng rng_cand(derive_seed(hp.seed, rng_tag::kCandidate, ti, static_cast<uint64_t>(cand)));
        TreeRoot root = generate_candidate_root(inbag, subset, data, hp, rng_cand, &cache);
        const double score = root.cached_criterion;
        if (score > best_score) {
          best_score = score;
          best_root = std::move(root);
        }
      }
    } else {
      best_root.members = inbag;
      best_root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, inbag.size()});
    }

    Rng rng_body(derive_seed(hp.seed, rng_tag::kBodyExpand, ti));
    Tree tree = expand_to_tree(best_root, data, hp, rng_body);
    tree.inbag = std::move(inbag);
    tree.oob.reserve(ds.n - inbag_size);
    auto it = tree.inbag.begin();
    for (size_t i = 0; i < ds.n; ++i) {
      if (it != tree.inbag.end() && *it == i) {
        ++it;
      } else {
        tree.oob.push_back(i);
      }
    }
    forest.trees[static_cast<size_t>(t)] = std::move(tree);
  });
  return forest;
}

int32_t tree_predict_label(const Tree& tree, const std::vector<double>& encoded_row) {
  const size_t leaf_node = tree.route(encoded_row);
  const LeafSummary& leaf = tree.leaf_summaries[static_cast<size_t>(tree.nodes[leaf_node].leaf)];
  int32_t best = 1;
  int64_t best_count = -1;
  for (size_t k = 0; k < leaf.class_counts.size(); ++k) {
    if (leaf.class_counts[k] > best_count) {
      best_count = leaf.class_counts[k];
      best = static_cast<int32_t>(k + 1);
    }
  }
  return best;
}

int32_t predict_label(const Forest& forest, const std::vector<double>& row) {
  if (forest.task != Task::Classification) {
    throw InvalidArgument("predict_label: not a classification forest");
  }
  const std::vector<double> encoded = forest.encode_row(row);
  std::vector<int64_t> votes(static_cast<size_t>(forest.num_classes), 0);
  for (const Tree& tree : forest.trees) {
    ++votes[static_cast<size_t>(tree_predict_label(tree, encoded) - 1)];
  }
  int32_t best = 1;
  int64_t best_count = -1;
  for (size_t k = 0; k < votes.size(); ++k) {
    if (votes[k] > best_count) {
      best_count = votes[k];
      best = static_cast<int32_t>(k + 1);
    }
  }
  return best;
}

std::vector<double> predict_proba(const Forest& forest, const std::vector<double>& row) {
  if (forest.task != Task::Classification) {
    throw InvalidArgument("predict_proba: not a classification forest");
  }
  const std::vector<double> encoded = forest.encode_row(row);
  std::vector<double> prob(static_cast<size_t>(forest.num_classes), 0.0);
  for (const Tree& tree : forest.trees) {
    const size_t leaf_node = tree.route(encoded);
    const LeafSummary& leaf =
        tree.leaf_summaries[static_cast<size_t>(tree.nodes[leaf_node].leaf)];
    const double total = static_cast<double>(leaf.count);
    for (size_t k = 0; k < prob.size(); ++k) {
      prob[k] += static_cast<double>(leaf.class_counts[k]) / total;
    }
  }
  for (double& v : prob) v /= static_cast<double>(forest.trees.size());
  return prob;
}

double predict_regression(const Forest& forest, const std::vector<double>& row) {
  if (forest.task != Task::Regression) {
    throw InvalidArgument("predict_regression: not a regression forest");
  }
  const std::vector<double> encoded = forest.encode_row(row);
  double sum = 0.0;
  for (const Tree& tree : forest.trees) {
    const size_t leaf_node = tree.route(encoded);
    sum += tree.leaf_summaries[static_cast<size_t>(tree.nodes[leaf_node].leaf)].mean;
  }
  return sum / static_cast<double>(forest.trees.size());
}

BatchPrediction predict_dataset(const Forest& forest, const Dataset& ds, int workers) {
  check_schema_match(forest, ds);
  BatchPrediction out;
  if (forest.task == Task::Classification) {
    out.labels.resize(ds.n);
    out.probabilities.resize(ds.n);
  } else {
    out.values.resize(ds.n);
  }
  parallel_for(static_cast<int64_t>(ds.n), workers, [&](int64_t i) {
    std::vector<double> row(ds.p);
    for (size_t c = 0; c < ds.p; ++c) row[c] = ds.columns[c][static_cast<size_t>(i)];
    if (forest.task == Task::Classification) {
      out.labels[static_cast<size_t>(i)] = predict_label(forest, row);
      out.probabilities[static_cast<size_t>(i)] = predict_proba(forest, row);
    } else {
      out.values[static_cast<size_t>(i)] = predict_regression(forest, row);
    }
  });
  return out;
}

double oob_error(const Forest& forest, const Dataset& ds, int /*workers*/) {
  const EncodedData data = forest.encode(ds);
  if (ds.n != forest.n_train) {
    throw ValidationError("oob_error requires the training dataset");
  }
  const size_t K = static_cast<size_t>(std::max(forest.num_classes, 1));
  std::vector<std::vector<double>> acc(ds.n, std::vector<double>(K, 0.0));
  std::vector<double> reg_sum(ds.n, 0.0);
  std::vector<int64_t> n_trees(ds.n, 0);
  for (const Tree& tree : forest.trees) {
    for (const size_t i : tree.oob) {
      const size_t leaf_node = tree.route_encoded(data, i);
      const LeafSummary& leaf =
          tree.leaf_summaries[static_cast<size_t>(tree.nodes[leaf_node].leaf)];
      if (forest.task == Task::Classification) {
        for (size_t k = 0; k < K; ++k) {
          acc[i][k] += static_cast<double>(leaf.class_counts[k]) / static_cast<double>(leaf.count);
        }
      } else {
        reg_sum[i] += leaf.mean;
      }
      ++n_trees[i];
    }
  }
  double err = 0.0;
  size_t counted = 0;
  for (size_t i = 0; i < ds.n; ++i) {
    if (n_trees[i] == 0) continue;
    ++counted;
    if (forest.task == Task::Classification) {
      size_t best = 0;
      for (size_t k = 1; k < K; ++k) {
        if (acc[i][k] > acc[i][best]) best = k;
      }
      if (static_cast<int32_t>(best + 1) != ds.labels[i]) err += 1.0;
    } else {
      const double pred = reg_sum[i] / static_cast<double>(n_trees[i]);
      const double d = pred - ds.y[i];
      err += d * d;
    }
  }
  if (counted == 0) throw ValidationError("no out-of-bag observations available");
  err /= static_cast<double>(counted);
  return forest.task == Task::Classification ? err : std::sqrt(err);
}

std::vector<std::vector<double>> load_covariate_rows_csv(const Forest& forest,
                                                         const std::string& path) {
  const CsvTable table = read_csv(path);
  std::map<std::string, size_t> col_index;
  for (size_t c = 0; c < table.header.size(); ++c) col_index[table.header[c]] = c;
  std::vector<size_t> source(forest.p);
  for (size_t c = 0; c < forest.p; ++c) {
    auto it = col_index.find(forest.covariates[c].name);
    if (it == col_index.end()) {
      throw ValidationError("prediction data is missing covariate '" +
                            forest.covariates[c].name + "'");
    }
    source[c] = it->second;
  }
  std::vector<std::vector<double>> rows(table.rows.size(), std::vector<double>(forest.p));
  for (size_t r = 0; r < table.rows.size(); ++r) {
    for (size_t c = 0; c < forest.p; ++c) {
      const std::string& cell = table.rows[r][source[c]];
      double v = 0.0;
      {
        const char* b = cell.data();
        const char* e = cell.data() + cell.size();
        auto res = std::from_chars(b, e, v);
        if (cell.empty() || res.ec != std::errc() || res.ptr != e) {
          throw ValidationError("non-numeric value '" + cell + "' at row " +
                                std::to_string(r + 1) + ", column '" +
                                forest.covariates[c].name + "'");
        }
      }
      if (forest.covariates[c].kind == CovariateKind::Nominal) {
        const auto& cats = forest.covariates[c].category_values;
        auto pos = std::find(cats.begin(), cats.end(), v);
        if (pos == cats.end()) {
          throw ValidationError("unseen category " + format_double(v) + " for covariate '" +
                                forest.covariates[c].name + "'");
        }
        v = static_cast<double>(pos - cats.begin() + 1);
      }
      rows[r][c] = v;
    }
  }
  return rows;
}

} // namespace unityforest
