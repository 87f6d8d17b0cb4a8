#include "unityforest/splitter.hpp"

#include <algorithm>
#include <cmath>

namespace unityforest {

namespace {

constexpr int kThresholdRetries = 10;
constexpr double kMinGain = 1e-12;

double gini_from_counts(const std::vector<int64_t>& counts, int64_t total) {
  double sum_sq = 0.0;
  for (const int64_t c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

double variance_of(const EncodedData& data, std::span<const size_t> obs) {
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

bool is_pure(const EncodedData& data, std::span<const size_t> obs) {
  if (data.task == Task::Classification) {
    const int32_t first = data.label[obs[0]];
    for (const size_t i : obs) {
      if (data.label[i] != first) return false;
    }
  } else {
    const double first = data.y[obs[0]];
    for (const size_t i : obs) {
      if (data.y[i] != first) return false;
    }
  }
  return true;
}

// Sorted midpoints of distinct values of one column over a set of rows.
std::vector<double> midpoints_of(const std::vector<double>& column,
                                 std::span<const size_t> obs, std::vector<double>& scratch) {
  scratch.clear();
  for (const size_t i : obs) scratch.push_back(column[i]);
  std::sort(scratch.begin(), scratch.end());
  std::vector<double> mids;
  for (size_t i = 1; i < scratch.size(); ++i) {
    if (scratch[i] != scratch[i - 1]) mids.push_back(0.5 * (scratch[i - 1] + scratch[i]));
  }
  return mids;
}

// Stable in-place partition of members[begin, end) by predicate, through a
// reused buffer; returns the split point.
template <typename Pred>
size_t stable_split(std::vector<size_t>& members, size_t begin, size_t end,
                    std::vector<size_t>& buffer, Pred&& pred) {
  buffer.clear();
  size_t write = begin;
  for (size_t k = begin; k < end; ++k) {
    if (pred(members[k])) {
      members[write++] = members[k];
    } else {
      buffer.push_back(members[k]);
    }
  }
  std::copy(buffer.begin(), buffer.end(), members.begin() + static_cast<ptrdiff_t>(write));
  return write;
}

} // namespace

ImpurityValue node_impurity(const EncodedData& data, std::span<const size_t> obs) {
  if (obs.empty()) throw InvalidArgument("node_impurity: empty observation slice");
  ImpurityValue out;
  out.weight = static_cast<int64_t>(obs.size());
  if (data.task == Task::Classification) {
    std::vector<int64_t> counts(static_cast<size_t>(data.num_classes), 0);
    for (const size_t i : obs) ++counts[static_cast<size_t>(data.label[i] - 1)];
    out.value = gini_from_counts(counts, out.weight);
  } else {
    out.value = variance_of(data, obs);
  }
  return out;
}

MidpointCache build_midpoint_cache(const EncodedData& data,
                                   const std::vector<size_t>& tree_sample,
                                   const std::vector<size_t>& covariate_subset) {
  MidpointCache cache;
  const size_t m = tree_sample.size();
  cache.midpoints.resize(covariate_subset.size());
  cache.values.resize(covariate_subset.size());
  cache.order.resize(covariate_subset.size());
  if (data.task == Task::Classification) {
    cache.labels.resize(m);
    for (size_t k = 0; k < m; ++k) cache.labels[k] = data.label[tree_sample[k]];
  } else {
    cache.y.resize(m);
    for (size_t k = 0; k < m; ++k) cache.y[k] = data.y[tree_sample[k]];
  }
  std::vector<double> scratch;
  scratch.reserve(m);
  for (size_t c = 0; c < covariate_subset.size(); ++c) {
    const auto& column = data.col[covariate_subset[c]];
    cache.midpoints[c] = midpoints_of(column, tree_sample, scratch);
    auto& values = cache.values[c];
    values.resize(m);
    for (size_t k = 0; k < m; ++k) values[k] = column[tree_sample[k]];
    auto& order = cache.order[c];
    order.resize(m);
    for (size_t k = 0; k < m; ++k) order[k] = static_cast<uint32_t>(k);
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return values[a] < values[b]; });
  }
  return cache;
}

int min_root_node_size(const Hyperparams& hp) { return std::max(hp.min_node_size, 2); }

namespace {

// Set-bit iteration over a node membership mask in sample-position space.
template <typename F>
void for_each_member(const uint64_t* mask, size_t words, F&& fn) {
  for (size_t w = 0; w < words; ++w) {
    uint64_t bits = mask[w];
    while (bits != 0) {
      const unsigned bit = static_cast<unsigned>(__builtin_ctzll(bits));
      fn(w * 64 + bit);
      bits &= bits - 1;
    }
  }
}

} // namespace

TreeRoot generate_candidate_root(const std::vector<size_t>& tree_sample,
                                 const std::vector<size_t>& covariate_subset,
                                 const EncodedData& data, const Hyperparams& hp, Rng& rng,
                                 const MidpointCache* root_cache) {
  if (covariate_subset.empty()) {
    throw InvalidArgument("generate_candidate_root: empty covariate subset");
  }
  MidpointCache local_cache;
  if (root_cache == nullptr) {
    local_cache = build_midpoint_cache(data, tree_sample, covariate_subset);
    root_cache = &local_cache;
  }
  const MidpointCache& cache = *root_cache;
  const int min_child = min_root_node_size(hp);
  const bool classify = data.task == Task::Classification;
  const size_t K = classify ? static_cast<size_t>(data.num_classes) : 0;
  const size_t m = tree_sample.size();
  const size_t words = (m + 63) / 64;
  const size_t max_nodes = (size_t{2} << hp.max_depth_root) - 1;

  TreeRoot root;
  root.covariate_subset = covariate_subset;
  root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, m});

  // Node membership masks and class counts live in flat per-thread arenas.
  thread_local std::vector<uint64_t> masks;
  thread_local std::vector<uint64_t> left_mask;
  thread_local std::vector<int64_t> node_counts;
  thread_local std::vector<int64_t> left_counts;
  thread_local std::vector<double> mids;
  masks.assign(max_nodes * words, 0);
  left_mask.resize(words);
  mids.reserve(m);
  for (size_t k = 0; k < m; ++k) masks[k / 64] |= uint64_t{1} << (k % 64);
  if (classify) {
    node_counts.assign(max_nodes * K, 0);
    for (size_t k = 0; k < m; ++k) {
      ++node_counts[static_cast<size_t>(cache.labels[k] - 1)];
    }
    left_counts.resize(K);
  }

  auto node_size = [&](size_t id) { return root.nodes[id].end - root.nodes[id].begin; };
  auto is_pure_node = [&](size_t id) {
    if (classify) {
      for (size_t k = 0; k < K; ++k) {
        if (node_counts[id * K + k] == static_cast<int64_t>(node_size(id))) return true;
      }
      return false;
    }
    bool first = true;
    double value = 0.0;
    bool pure = true;
    for_each_member(masks.data() + id * words, words, [&](size_t pos) {
      if (first) {
        value = cache.y[pos];
        first = false;
      } else if (cache.y[pos] != value) {
        pure = false;
      }
    });
    return pure;
  };

  // Children are appended behind their parent, so a forward scan visits
  // nodes breadth-first. Node begin/end hold sizes until materialization.
  for (size_t id = 0; id < root.nodes.size(); ++id) {
    const size_t size = node_size(id);
    const int32_t depth = root.nodes[id].depth;
    if (depth >= hp.max_depth_root) continue;
    if (size < 2 * static_cast<size_t>(min_child)) continue;
    if (is_pure_node(id)) continue;
    const uint64_t* mask = masks.data() + id * words;

    for (int attempt = 0; attempt < kThresholdRetries; ++attempt) {
      const size_t subset_idx = rng.uniform_index(covariate_subset.size());
      const auto& values = cache.values[subset_idx];
      double threshold;
      if (id == 0) {
        const auto& root_mids = cache.midpoints[subset_idx];
        if (root_mids.empty()) continue;
        threshold = root_mids[rng.uniform_index(root_mids.size())];
      } else {
        // Midpoints of distinct member values, via the presorted order.
        mids.clear();
        double prev = 0.0;
        bool have_prev = false;
        for (const uint32_t pos : cache.order[subset_idx]) {
          if ((mask[pos / 64] >> (pos % 64) & 1) == 0) continue;
          const double v = values[pos];
          if (have_prev && v != prev) mids.push_back(0.5 * (prev + v));
          prev = v;
          have_prev = true;
        }
        if (mids.empty()) continue;
        threshold = mids[rng.uniform_index(mids.size())];
      }

      size_t n_left = 0;
      std::fill(left_mask.begin(), left_mask.end(), 0);
      if (classify) std::fill(left_counts.begin(), left_counts.end(), 0);
      for_each_member(mask, words, [&](size_t pos) {
        if (values[pos] <= threshold) {
          ++n_left;
          left_mask[pos / 64] |= uint64_t{1} << (pos % 64);
          if (classify) ++left_counts[static_cast<size_t>(cache.labels[pos] - 1)];
        }
      });
      const size_t n_right = size - n_left;
      if (n_left < static_cast<size_t>(min_child) || n_right < static_cast<size_t>(min_child)) {
        continue;
      }
      const size_t left_id = root.nodes.size();
      root.nodes[id].covariate = static_cast<int32_t>(covariate_subset[subset_idx]);
      root.nodes[id].threshold = threshold;
      root.nodes[id].left = static_cast<int32_t>(left_id);
      root.nodes[id].right = static_cast<int32_t>(left_id + 1);
      root.nodes.push_back({-1, -1, -1, 0.0, depth + 1, 0, n_left});
      root.nodes.push_back({-1, -1, -1, 0.0, depth + 1, 0, n_right});
      for (size_t w = 0; w < words; ++w) {
        masks[left_id * words + w] = left_mask[w];
        masks[(left_id + 1) * words + w] = mask[w] & ~left_mask[w];
      }
      if (classify) {
        for (size_t k = 0; k < K; ++k) {
          node_counts[left_id * K + k] = left_counts[k];
          node_counts[(left_id + 1) * K + k] = node_counts[id * K + k] - left_counts[k];
        }
      }
      break;
    }
  }

  // Materialize the member partition: depth-first range assignment keeps
  // every subtree contiguous.
  root.members.resize(m);
  {
    size_t cursor = 0;
    auto assign = [&](auto&& self, size_t id) -> void {
      RootNode& nd = root.nodes[id];
      nd.begin = cursor;
      if (nd.is_leaf()) {
        for_each_member(masks.data() + id * words, words,
                        [&](size_t pos) { root.members[cursor++] = tree_sample[pos]; });
      } else {
        self(self, static_cast<size_t>(nd.left));
        self(self, static_cast<size_t>(nd.right));
      }
      nd.end = cursor;
    };
    assign(assign, 0);
  }

  // Criterion from the tracked leaf counts (classification); the regression
  // path recomputes from the outcome values.
  if (classify) {
    const double n_all = static_cast<double>(m);
    double total;
    {
      double sum_sq = 0.0;
      for (size_t k = 0; k < K; ++k) {
        const double f = static_cast<double>(node_counts[k]) / n_all;
        sum_sq += f * f;
      }
      total = 1.0 - sum_sq;
    }
    double weighted = 0.0;
    for (size_t id = 0; id < root.nodes.size(); ++id) {
      if (!root.nodes[id].is_leaf()) continue;
      const double n_leaf = static_cast<double>(node_size(id));
      double sum_sq = 0.0;
      for (size_t k = 0; k < K; ++k) {
        const double f = static_cast<double>(node_counts[id * K + k]) / n_leaf;
        sum_sq += f * f;
      }
      weighted += n_leaf / n_all * (1.0 - sum_sq);
    }
    root.cached_criterion = total - weighted;
  } else {
    root.cached_criterion = partition_criterion(root, data);
  }
  return root;
}

double partition_criterion(const TreeRoot& root, const EncodedData& data) {
  thread_local std::vector<int64_t> counts;
  auto impurity = [&](std::span<const size_t> obs) {
    if (data.task == Task::Classification) {
      counts.assign(static_cast<size_t>(data.num_classes), 0);
      for (const size_t i : obs) ++counts[static_cast<size_t>(data.label[i] - 1)];
      return gini_from_counts(counts, static_cast<int64_t>(obs.size()));
    }
    return variance_of(data, obs);
  };
  const auto all = root.node_members(0);
  if (all.empty()) throw InvalidArgument("partition_criterion: empty tree sample");
  const double total = impurity(all);
  double weighted = 0.0;
  for (size_t id = 0; id < root.nodes.size(); ++id) {
    if (!root.nodes[id].is_leaf()) continue;
    const auto members = root.node_members(id);
    weighted +=
        static_cast<double>(members.size()) / static_cast<double>(all.size()) * impurity(members);
  }
  return total - weighted;
}

size_t select_best_root(const std::vector<TreeRoot>& candidates, const EncodedData& data) {
  if (candidates.empty()) throw InvalidArgument("select_best_root: no candidates");
  size_t best = 0;
  double best_score = partition_criterion(candidates[0], data);
  for (size_t k = 1; k < candidates.size(); ++k) {
    const double score = partition_criterion(candidates[k], data);
    if (score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best;
}

std::vector<TreeRoot> enumerate_single_split_roots(const std::vector<size_t>& tree_sample,
                                                   const std::vector<size_t>& covariates,
                                                   const EncodedData& data, int min_root_node) {
  std::vector<TreeRoot> out;
  std::vector<double> scratch;
  for (const size_t cov : covariates) {
    const auto& column = data.col[cov];
    const std::vector<double> mids = midpoints_of(column, tree_sample, scratch);
    for (const double threshold : mids) {
      size_t n_left = 0;
      for (const size_t i : tree_sample) {
        if (column[i] <= threshold) ++n_left;
      }
      const size_t n_right = tree_sample.size() - n_left;
      if (n_left < static_cast<size_t>(min_root_node) ||
          n_right < static_cast<size_t>(min_root_node)) {
        continue;
      }
      TreeRoot root;
      root.members = tree_sample;
      root.covariate_subset = covariates;
      std::stable_partition(root.members.begin(), root.members.end(),
                            [&](size_t i) { return column[i] <= threshold; });
      root.nodes.push_back({1, 2, static_cast<int32_t>(cov), threshold, 0, 0,
                            tree_sample.size()});
      root.nodes.push_back({-1, -1, -1, 0.0, 1, 0, n_left});
      root.nodes.push_back({-1, -1, -1, 0.0, 1, n_left, tree_sample.size()});
      out.push_back(std::move(root));
    }
  }
  if (out.empty()) {
    // No valid split anywhere: fall back to the single-leaf root.
    TreeRoot root;
    root.members = tree_sample;
    root.covariate_subset = covariates;
    root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, tree_sample.size()});
    out.push_back(std::move(root));
  }
  return out;
}

namespace {

// Best exhaustive split of one node over the given covariates. Returns gain
// (impurity reduction, unweighted) or 0 when nothing improves.
struct BestSplit {
  double gain = 0.0;
  int32_t covariate = -1;
  double threshold = 0.0;
};

BestSplit find_best_split(const EncodedData& data, std::span<const size_t> obs,
                          const std::vector<size_t>& try_covariates, double parent_impurity,
                          std::vector<std::pair<double, size_t>>& scratch) {
  BestSplit best;
  best.gain = kMinGain;
  bool found = false;
  const size_t n = obs.size();
  const double dn = static_cast<double>(n);

  if (data.task == Task::Classification) {
    const size_t K = static_cast<size_t>(data.num_classes);
    std::vector<int64_t> total(K, 0);
    for (const size_t i : obs) ++total[static_cast<size_t>(data.label[i] - 1)];
    std::vector<int64_t> left(K);
    for (const size_t cov : try_covariates) {
      const auto& column = data.col[cov];
      scratch.clear();
      for (const size_t i : obs) scratch.emplace_back(column[i], i);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::fill(left.begin(), left.end(), 0);
      size_t n_left = 0;
      for (size_t k = 0; k + 1 < n; ++k) {
        ++left[static_cast<size_t>(data.label[scratch[k].second] - 1)];
        ++n_left;
        if (scratch[k].first == scratch[k + 1].first) continue;
        double left_sq = 0.0, right_sq = 0.0;
        for (size_t c = 0; c < K; ++c) {
          const double l = static_cast<double>(left[c]);
          const double r = static_cast<double>(total[c] - left[c]);
          left_sq += l * l;
          right_sq += r * r;
        }
        const double n_l = static_cast<double>(n_left);
        const double n_r = dn - n_l;
        // weighted child gini = sum_children (n_c/n) (1 - sum_k p_k^2)
        const double weighted = 1.0 - (left_sq / n_l + right_sq / n_r) / dn;
        const double gain = parent_impurity - weighted;
        if (gain > best.gain) {
          best.gain = gain;
          best.covariate = static_cast<int32_t>(cov);
          best.threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
          found = true;
        }
      }
    }
  } else {
    double total_sum = 0.0;
    for (const size_t i : obs) total_sum += data.y[i];
    for (const size_t cov : try_covariates) {
      const auto& column = data.col[cov];
      scratch.clear();
      for (const size_t i : obs) scratch.emplace_back(column[i], i);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double left_sum = 0.0;
      size_t n_left = 0;
      for (size_t k = 0; k + 1 < n; ++k) {
        left_sum += data.y[scratch[k].second];
        ++n_left;
        if (scratch[k].first == scratch[k + 1].first) continue;
        const double n_l = static_cast<double>(n_left);
        const double n_r = dn - n_l;
        const double right_sum = total_sum - left_sum;
        // Variance decomposition: weighted child variance differs from the
        // parent variance by the between-group term, computed directly here.
        const double mean = total_sum / dn;
        const double mean_l = left_sum / n_l;
        const double mean_r = right_sum / n_r;
        const double between = (n_l * (mean_l - mean) * (mean_l - mean) +
                                n_r * (mean_r - mean) * (mean_r - mean)) /
                               dn;
        const double gain = between;
        if (gain > best.gain) {
          best.gain = gain;
          best.covariate = static_cast<int32_t>(cov);
          best.threshold = 0.5 * (scratch[k].first + scratch[k + 1].first);
          found = true;
        }
      }
    }
  }
  if (!found) best.covariate = -1;
  return best;
}

} // namespace

Tree expand_to_tree(const TreeRoot& root, const EncodedData& data, const Hyperparams& hp,
                    Rng& rng) {
  Tree tree;
  tree.nodes.reserve(root.nodes.size() * 4);
  for (const RootNode& rn : root.nodes) {
    Node nd;
    nd.left = rn.left;
    nd.right = rn.right;
    nd.covariate = rn.covariate;
    nd.threshold = rn.threshold;
    nd.in_root = !rn.is_leaf();
    tree.nodes.push_back(nd);
  }

  std::vector<size_t> members = root.members;
  std::vector<std::pair<double, size_t>> scratch;
  scratch.reserve(members.size());

  auto make_leaf = [&](size_t id, size_t begin, size_t end) {
    LeafSummary leaf;
    leaf.count = static_cast<int64_t>(end - begin);
    if (data.task == Task::Classification) {
      leaf.class_counts.assign(static_cast<size_t>(data.num_classes), 0);
      for (size_t k = begin; k < end; ++k) {
        ++leaf.class_counts[static_cast<size_t>(data.label[members[k]] - 1)];
      }
    } else {
      double sum = 0.0;
      for (size_t k = begin; k < end; ++k) sum += data.y[members[k]];
      leaf.mean = sum / static_cast<double>(leaf.count);
    }
    tree.nodes[id].leaf = static_cast<int32_t>(tree.leaf_summaries.size());
    tree.leaf_summaries.push_back(std::move(leaf));
  };

  struct WorkItem {
    size_t id;
    size_t begin;
    size_t end;
  };
  std::vector<WorkItem> stack;

  // Root leaves are grown one after another, each depth-first.
  for (size_t id = 0; id < root.nodes.size(); ++id) {
    if (!root.nodes[id].is_leaf()) continue;
    stack.push_back({id, root.nodes[id].begin, root.nodes[id].end});
    while (!stack.empty()) {
      const WorkItem item = stack.back();
      stack.pop_back();
      const size_t size = item.end - item.begin;
      std::span<const size_t> obs{members.data() + item.begin, size};
      if (size < static_cast<size_t>(hp.min_node_size) || is_pure(data, obs)) {
        make_leaf(item.id, item.begin, item.end);
        continue;
      }
      const std::vector<size_t> mtry_covs =
          rng.sample_without_replacement(data.p, static_cast<size_t>(hp.mtry));
      const double parent_impurity = node_impurity(data, obs).value;
      const BestSplit split =
          find_best_split(data, obs, mtry_covs, parent_impurity, scratch);
      if (split.covariate < 0) {
        make_leaf(item.id, item.begin, item.end);
        continue;
      }
      const auto& column = data.col[static_cast<size_t>(split.covariate)];
      thread_local std::vector<size_t> partition_buffer;
      const size_t mid = stable_split(members, item.begin, item.end, partition_buffer,
                                      [&](size_t i) { return column[i] <= split.threshold; });
      const size_t n_left = mid - item.begin;
      const size_t left_id = tree.nodes.size();
      tree.nodes[item.id].covariate = split.covariate;
      tree.nodes[item.id].threshold = split.threshold;
      tree.nodes[item.id].left = static_cast<int32_t>(left_id);
      tree.nodes[item.id].right = static_cast<int32_t>(left_id + 1);
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({left_id + 1, item.begin + n_left, item.end});
      stack.push_back({left_id, item.begin, item.begin + n_left});
    }
  }
  return tree;
}

} // namespace unityforest
