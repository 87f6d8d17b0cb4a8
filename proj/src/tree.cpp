#include "unityforest/tree.hpp"

namespace unityforest {

size_t Tree::route(const std::vector<double>& row) const {
  size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const Node& nd = nodes[id];
    id = row[static_cast<size_t>(nd.covariate)] <= nd.threshold
             ? static_cast<size_t>(nd.left)
             : static_cast<size_t>(nd.right);
  }
  return id;
}

size_t Tree::route_encoded(const EncodedData& data, size_t obs) const {
  size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const Node& nd = nodes[id];
    id = data.col[static_cast<size_t>(nd.covariate)][obs] <= nd.threshold
             ? static_cast<size_t>(nd.left)
             : static_cast<size_t>(nd.right);
  }
  return id;
}

size_t Tree::count_root_internal_nodes() const {
  size_t count = 0;
  for (const Node& nd : nodes) {
    if (nd.in_root) ++count;
  }
  return count;
}

std::vector<int32_t> Tree::root_covariate_layout(int max_depth_root) const {
  const size_t positions = (size_t{1} << max_depth_root) - 1;
  std::vector<int32_t> layout(positions, -1);
  struct Item {
    size_t node;
    size_t pos;
  };
  std::vector<Item> stack;
  if (!nodes.empty() && nodes[0].in_root) stack.push_back({0, 0});
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const Node& nd = nodes[it.node];
    layout[it.pos] = nd.covariate;
    const size_t lpos = 2 * it.pos + 1;
    const size_t rpos = 2 * it.pos + 2;
    if (lpos < positions && nodes[static_cast<size_t>(nd.left)].in_root) {
      stack.push_back({static_cast<size_t>(nd.left), lpos});
    }
    if (rpos < positions && nodes[static_cast<size_t>(nd.right)].in_root) {
      stack.push_back({static_cast<size_t>(nd.right), rpos});
    }
  }
  return layout;
}

std::vector<std::vector<size_t>> route_root_memberships(const Tree& tree,
                                                        const EncodedData& data,
                                                        const std::vector<size_t>& obs) {
  std::vector<std::vector<size_t>> membership(tree.nodes.size());
  if (tree.nodes.empty()) return membership;
  membership[0] = obs;
  // Root nodes precede their children in the node array, so one forward pass
  // partitions every internal root node into its children.
  for (size_t id = 0; id < tree.nodes.size(); ++id) {
    const Node& nd = tree.nodes[id];
    if (!nd.in_root) continue;
    const auto& members = membership[id];
    auto& left = membership[static_cast<size_t>(nd.left)];
    auto& right = membership[static_cast<size_t>(nd.right)];
    const auto& column = data.col[static_cast<size_t>(nd.covariate)];
    for (const size_t i : members) {
      (column[i] <= nd.threshold ? left : right).push_back(i);
    }
  }
  return membership;
}

} // namespace unityforest
