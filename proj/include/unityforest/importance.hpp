#pragma once

#include <cstdint>
#include <vector>

#include "unityforest/forest.hpp"

namespace unityforest {

// One scored split at an internal node of a tree root. For in-bag records the
// score is node_size * impurity reduction over in-bag observations; for
// out-of-bag records both the size and the reduction come from the OOB
// observations routed through the node (degenerate nodes score 0).
struct SplitScoreRecord {
  size_t tree = 0;
  size_t node = 0;
  int32_t covariate = -1;
  int64_t node_size = 0;
  double score = 0.0;
};

std::vector<SplitScoreRecord> collect_inbag_split_scores(const Forest& forest,
                                                         const EncodedData& data, int workers);
std::vector<SplitScoreRecord> collect_oob_split_scores(const Forest& forest,
                                                       const EncodedData& data, int workers);

// Top-scoring splits for one covariate: the ceil(prop_best_splits * m_j)
// highest scores, with a floor of min(5, m_j). Ties break by (tree, node).
std::vector<SplitScoreRecord> select_top_splits(std::vector<SplitScoreRecord> records,
                                                double prop_best_splits);

struct VimResult {
  std::vector<double> values;                               // per covariate
  std::vector<std::vector<SplitScoreRecord>> selected;      // B_j per covariate
};

// Unity VIM: for each covariate j, sum over its top in-bag-scored root splits
// of N_l * (OOB split reduction - OOB split reduction after permuting j among
// the OOB observations at the node). One fresh permutation per node, streams
// derived from (perm_seed, covariate, tree, node).
VimResult unity_vim(const Forest& forest, const EncodedData& data, uint64_t perm_seed,
                    int workers);

// Conventional permutation importance baseline: per covariate, the mean over
// trees of (OOB error after permuting the covariate) - (OOB error).
std::vector<double> permutation_vim_baseline(const Forest& forest, const EncodedData& data,
                                             uint64_t perm_seed, int workers);

// Ordinal ranks (1 = largest value), ties broken by covariate index.
std::vector<size_t> vim_ranks(const std::vector<double>& values);

} // namespace unityforest
