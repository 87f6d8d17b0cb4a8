#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "unityforest/hyperparams.hpp"
#include "unityforest/rng.hpp"
#include "unityforest/tree.hpp"

namespace unityforest {

// Gini impurity (classification) or population variance (regression) plus the
// observation count it summarizes.
struct ImpurityValue {
  double value = 0.0;
  int64_t weight = 0;
};

ImpurityValue node_impurity(const EncodedData& data, std::span<const size_t> obs);

// Candidate tree root under construction: a bounded-depth binary tree whose
// nodes own contiguous ranges of the partitioned member buffer.
struct RootNode {
  int32_t left = -1;
  int32_t right = -1;
  int32_t covariate = -1;
  double threshold = 0.0;
  int32_t depth = 0;
  size_t begin = 0;
  size_t end = 0;

  bool is_leaf() const { return left < 0; }
};

struct TreeRoot {
  std::vector<RootNode> nodes;
  std::vector<size_t> members;  // tree-sample indices, partitioned by node ranges
  std::vector<size_t> covariate_subset;
  // Partition criterion computed during generation; NaN when not available.
  double cached_criterion = std::numeric_limits<double>::quiet_NaN();

  std::span<const size_t> node_members(size_t id) const {
    return {members.data() + nodes[id].begin, nodes[id].end - nodes[id].begin};
  }
};

// Per-tree candidate-generation cache shared by all candidates of one tree:
// midpoints of the full tree sample per subset covariate for the depth-0
// draw, plus dense outcome/value/ordering arrays in sample-position space so
// deeper nodes never sort.
struct MidpointCache {
  std::vector<std::vector<double>> midpoints;   // indexed like the covariate subset
  std::vector<int32_t> labels;                  // [m], classification
  std::vector<double> y;                        // [m], regression
  std::vector<std::vector<double>> values;      // [subset][m]
  std::vector<std::vector<uint32_t>> order;     // [subset][m], positions ascending by value
};

MidpointCache build_midpoint_cache(const EncodedData& data,
                                   const std::vector<size_t>& tree_sample,
                                   const std::vector<size_t>& covariate_subset);

int min_root_node_size(const Hyperparams& hp);

// One random candidate root: at each expandable node a covariate is drawn
// uniformly from the subset and a threshold uniformly from the midpoints of
// consecutive distinct values at that node. A draw whose child would fall
// below the minimum root node size is retried up to 10 times, then the node
// stays a root leaf. Expansion also stops at max_depth_root and at pure nodes.
TreeRoot generate_candidate_root(const std::vector<size_t>& tree_sample,
                                 const std::vector<size_t>& covariate_subset,
                                 const EncodedData& data, const Hyperparams& hp, Rng& rng,
                                 const MidpointCache* root_cache = nullptr);

// Impurity of the whole tree sample minus the size-weighted impurity of the
// root leaves. Single-leaf roots score exactly 0.
double partition_criterion(const TreeRoot& root, const EncodedData& data);

// Index of the candidate with the largest partition criterion; ties keep the
// lowest index.
size_t select_best_root(const std::vector<TreeRoot>& candidates, const EncodedData& data);

// Exhaustive-candidate mode: every (covariate, midpoint threshold) single
// split as a depth-1 root, ordered by covariate then threshold; splits whose
// children would fall below min_root_node are skipped.
std::vector<TreeRoot> enumerate_single_split_roots(const std::vector<size_t>& tree_sample,
                                                   const std::vector<size_t>& covariates,
                                                   const EncodedData& data, int min_root_node);

// CART expansion below every root leaf: at each node mtry covariates are
// drawn without replacement from all p and the impurity-reduction-maximizing
// (covariate, midpoint) split is taken. Nodes stop at min_node_size, purity,
// or when no split improves impurity.
Tree expand_to_tree(const TreeRoot& root, const EncodedData& data, const Hyperparams& hp,
                    Rng& rng);

} // namespace unityforest
