#pragma once

#include <cstdint>
#include <vector>

#include "unityforest/common.hpp"

namespace unityforest {

// Encoded training view: nominal columns replaced by ordered category ranks,
// outcome split out per task. Shared read-only across workers.
struct EncodedData {
  size_t n = 0;
  size_t p = 0;
  Task task = Task::Classification;
  int num_classes = 0;
  std::vector<std::vector<double>> col;  // [p][n]
  std::vector<int32_t> label;            // 1..K
  std::vector<double> y;
};

struct Node {
  int32_t left = -1;   // -1 = terminal leaf
  int32_t right = -1;
  int32_t covariate = -1;
  double threshold = 0.0;
  bool in_root = false;  // internal node of the tree root (never a root leaf)
  int32_t leaf = -1;     // index into Tree::leaf_summaries for terminal leaves

  bool is_leaf() const { return left < 0; }
};

struct LeafSummary {
  std::vector<int64_t> class_counts;  // classification
  double mean = 0.0;                  // regression
  int64_t count = 0;
};

struct Tree {
  std::vector<Node> nodes;  // nodes[0] is the top of the tree root
  std::vector<LeafSummary> leaf_summaries;
  std::vector<size_t> inbag;  // sorted tree-sample indices
  std::vector<size_t> oob;    // sorted complement

  size_t route(const std::vector<double>& row) const;  // terminal node id
  size_t route_encoded(const EncodedData& data, size_t obs) const;

  size_t count_root_internal_nodes() const;

  // Split covariate per position of the complete binary tree of depth
  // max_depth_root (heap layout, depths 0..max_depth_root-1); -1 where the
  // position holds no root split.
  std::vector<int32_t> root_covariate_layout(int max_depth_root) const;
};

// Observation lists routed through the tree-root part only: memberships for
// every internal root node and for each of their direct children.
// membership[node_id] is empty for nodes below the root part.
std::vector<std::vector<size_t>> route_root_memberships(const Tree& tree,
                                                        const EncodedData& data,
                                                        const std::vector<size_t>& obs);

} // namespace unityforest
