#include "unityforest/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unityforest/parallel.hpp"

namespace unityforest {

namespace {

double impurity_of(const EncodedData& data, const std::vector<size_t>& obs) {
  if (data.task == Task::Classification) {
    std::vector<int64_t> counts(static_cast<size_t>(data.num_classes), 0);
    for (const size_t i : obs) ++counts[static_cast<size_t>(data.label[i] - 1)];
    double sum_sq = 0.0;
    for (const int64_t c : counts) {
      const double f = static_cast<double>(c) / static_cast<double>(obs.size());
      sum_sq += f * f;
    }
    return 1.0 - sum_sq;
  }
  double mean = 0.0;
  for (const size_t i : obs) mean += data.y[i];
  mean /= static_cast<double>(obs.size());
  double ss = 0.0;
  for (const size_t i : obs) {
    const double d = data.y[i] - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(obs.size());
}

// Reduction of one split evaluated on the given node members; 0 when fewer
// than 2 observations reach the node or one side is empty.
double split_reduction(const EncodedData& data, const std::vector<size_t>& members,
                       const std::vector<size_t>& left, const std::vector<size_t>& right) {
  if (members.size() < 2 || left.empty() || right.empty()) return 0.0;
  const double n = static_cast<double>(members.size());
  return impurity_of(data, members) -
         static_cast<double>(left.size()) / n * impurity_of(data, left) -
         static_cast<double>(right.size()) / n * impurity_of(data, right);
}

std::vector<SplitScoreRecord> collect_split_scores(const Forest& forest, const EncodedData& data,
                                                   bool use_oob, int workers) {
  std::vector<std::vector<SplitScoreRecord>> per_tree(forest.trees.size());
  parallel_for(static_cast<int64_t>(forest.trees.size()), workers, [&](int64_t t) {
    const Tree& tree = forest.trees[static_cast<size_t>(t)];
    const auto membership =
        route_root_memberships(tree, data, use_oob ? tree.oob : tree.inbag);
    auto& records = per_tree[static_cast<size_t>(t)];
    for (size_t id = 0; id < tree.nodes.size(); ++id) {
      const Node& nd = tree.nodes[id];
      if (!nd.in_root) continue;
      SplitScoreRecord rec;
      rec.tree = static_cast<size_t>(t);
      rec.node = id;
      rec.covariate = nd.covariate;
      rec.node_size = static_cast<int64_t>(membership[id].size());
      rec.score = static_cast<double>(rec.node_size) *
                  split_reduction(data, membership[id],
                                  membership[static_cast<size_t>(nd.left)],
                                  membership[static_cast<size_t>(nd.right)]);
      records.push_back(rec);
    }
  });
  std::vector<SplitScoreRecord> out;
  for (auto& records : per_tree) {
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

} // namespace

std::vector<SplitScoreRecord> collect_inbag_split_scores(const Forest& forest,
                                                         const EncodedData& data, int workers) {
  return collect_split_scores(forest, data, false, workers);
}

std::vector<SplitScoreRecord> collect_oob_split_scores(const Forest& forest,
                                                       const EncodedData& data, int workers) {
  return collect_split_scores(forest, data, true, workers);
}

std::vector<SplitScoreRecord> select_top_splits(std::vector<SplitScoreRecord> records,
                                                double prop_best_splits) {
  const size_t m = records.size();
  if (m == 0) return {};
  const size_t by_prop =
      static_cast<size_t>(std::ceil(prop_best_splits * static_cast<double>(m)));
  const size_t k = std::max(by_prop, std::min<size_t>(5, m));
  std::sort(records.begin(), records.end(), [](const SplitScoreRecord& a,
                                               const SplitScoreRecord& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tree != b.tree) return a.tree < b.tree;
    return a.node < b.node;
  });
  records.resize(std::min(k, m));
  return records;
}

VimResult unity_vim(const Forest& forest, const EncodedData& data, uint64_t perm_seed,
                    int workers) {
  const std::vector<SplitScoreRecord> records = collect_inbag_split_scores(forest, data, workers);
  std::vector<std::vector<SplitScoreRecord>> by_covariate(forest.p);
  for (const SplitScoreRecord& rec : records) {
    by_covariate[static_cast<size_t>(rec.covariate)].push_back(rec);
  }

  VimResult result;
  result.values.assign(forest.p, 0.0);
  result.selected.resize(forest.p);

  parallel_for(static_cast<int64_t>(forest.p), workers, [&](int64_t ci) {
    const size_t j = static_cast<size_t>(ci);
    auto selected = select_top_splits(by_covariate[j], forest.hp.prop_best_splits);
    if (selected.empty()) {
      return;  // covariate never split on in any root: VIM stays 0
    }
    // Group the selected nodes by tree so each tree is routed once.
    std::vector<size_t> order(selected.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return selected[a].tree < selected[b].tree; });

    double vim = 0.0;
    size_t k = 0;
    while (k < order.size()) {
      const size_t tree_id = selected[order[k]].tree;
      const Tree& tree = forest.trees[tree_id];
      const auto oob_members = route_root_memberships(tree, data, tree.oob);
      for (; k < order.size() && selected[order[k]].tree == tree_id; ++k) {
        const SplitScoreRecord& rec = selected[order[k]];
        const Node& nd = tree.nodes[rec.node];
        const auto& at_node = oob_members[rec.node];
        double oob_sc = 0.0;
        double oob_sc_perm = 0.0;
        if (at_node.size() >= 2) {
          oob_sc = split_reduction(data, at_node, oob_members[static_cast<size_t>(nd.left)],
                                   oob_members[static_cast<size_t>(nd.right)]);
          // Permute covariate j among the OOB observations at this node and
          // re-evaluate the same split rule.
          std::vector<double> values(at_node.size());
          const auto& column = data.col[j];
          for (size_t i = 0; i < at_node.size(); ++i) values[i] = column[at_node[i]];
          Rng rng(derive_seed(perm_seed, rng_tag::kVimPermutation, j, tree_id, rec.node));
          rng.shuffle(values);
          std::vector<size_t> left, right;
          for (size_t i = 0; i < at_node.size(); ++i) {
            (values[i] <= nd.threshold ? left : right).push_back(at_node[i]);
          }
          oob_sc_perm = split_reduction(data, at_node, left, right);
        }
        vim += static_cast<double>(rec.node_size) * (oob_sc - oob_sc_perm);
      }
    }
    result.values[j] = vim;
    result.selected[j] = std::move(selected);
  });
  return result;
}

std::vector<double> permutation_vim_baseline(const Forest& forest, const EncodedData& data,
                                             uint64_t perm_seed, int workers) {
  const size_t T = forest.trees.size();
  std::vector<std::vector<double>> per_tree(T, std::vector<double>(forest.p, 0.0));

  parallel_for(static_cast<int64_t>(T), workers, [&](int64_t t) {
    const Tree& tree = forest.trees[static_cast<size_t>(t)];
    const size_t n_oob = tree.oob.size();
    if (n_oob == 0) return;

    std::vector<bool> used(forest.p, false);
    for (const Node& nd : tree.nodes) {
      if (!nd.is_leaf()) used[static_cast<size_t>(nd.covariate)] = true;
    }

    // Routing with one covariate's values overridden.
    auto tree_error = [&](int32_t override_cov, const std::vector<double>& override_values) {
      double err = 0.0;
      for (size_t k = 0; k < n_oob; ++k) {
        const size_t i = tree.oob[k];
        size_t id = 0;
        while (!tree.nodes[id].is_leaf()) {
          const Node& nd = tree.nodes[id];
          const double v = nd.covariate == override_cov
                               ? override_values[k]
                               : data.col[static_cast<size_t>(nd.covariate)][i];
          id = v <= nd.threshold ? static_cast<size_t>(nd.left) : static_cast<size_t>(nd.right);
        }
        const LeafSummary& leaf =
            tree.leaf_summaries[static_cast<size_t>(tree.nodes[id].leaf)];
        if (data.task == Task::Classification) {
          size_t best = 0;
          for (size_t c = 1; c < leaf.class_counts.size(); ++c) {
            if (leaf.class_counts[c] > leaf.class_counts[best]) best = c;
          }
          if (static_cast<int32_t>(best + 1) != data.label[i]) err += 1.0;
        } else {
          const double d = leaf.mean - data.y[i];
          err += d * d;
        }
      }
      return err / static_cast<double>(n_oob);
    };

    const double base_error = tree_error(-1, {});
    std::vector<double> values(n_oob);
    for (size_t j = 0; j < forest.p; ++j) {
      if (!used[j]) continue;  // routing unchanged, exact zero contribution
      for (size_t k = 0; k < n_oob; ++k) values[k] = data.col[j][tree.oob[k]];
      Rng rng(derive_seed(perm_seed, rng_tag::kBaselinePermutation, j, static_cast<uint64_t>(t)));
      rng.shuffle(values);
      per_tree[static_cast<size_t>(t)][j] =
          tree_error(static_cast<int32_t>(j), values) - base_error;
    }
  });

  std::vector<double> out(forest.p, 0.0);
  for (size_t t = 0; t < T; ++t) {
    for (size_t j = 0; j < forest.p; ++j) out[j] += per_tree[t][j];
  }
  for (double& v : out) v /= static_cast<double>(T);
  return out;
}

std::vector<size_t> vim_ranks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  std::vector<size_t> rank(values.size());
  for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;
  return rank;
}

} // namespace unityforest
