#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "test_util.hpp"
#include "unityforest/splitter.hpp"

using namespace unityforest;
using namespace test_util;

namespace {

Hyperparams small_hp() {
  Hyperparams hp;
  hp.prop_var = 1.0;
  hp.mtry = 1;
  hp.min_node_size = 1;
  return hp;
}

Dataset random_binary_dataset(size_t n, size_t p, Rng& rng) {
  std::vector<std::vector<double>> cols(p, std::vector<double>(n));
  std::vector<int32_t> labels(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < p; ++c) cols[c][i] = rng.normal();
    labels[i] = rng.uniform_double() < 0.5 ? 1 : 2;
  }
  return make_classification(std::move(cols), std::move(labels));
}

// Independent oracle: weighted-impurity reduction of the best single split
// over all covariates and all midpoints.
double brute_force_best_reduction(const Dataset& ds) {
  const size_t n = ds.n;
  double parent;
  {
    parent = oracle_gini(ds.labels, ds.num_classes);
  }
  double best = 0.0;
  for (size_t c = 0; c < ds.p; ++c) {
    std::vector<double> values = ds.columns[c];
    std::sort(values.begin(), values.end());
    for (size_t k = 1; k < n; ++k) {
      if (values[k] == values[k - 1]) continue;
      const double thr = 0.5 * (values[k] + values[k - 1]);
      std::vector<int32_t> left, right;
      for (size_t i = 0; i < n; ++i) {
        (ds.columns[c][i] <= thr ? left : right).push_back(ds.labels[i]);
      }
      const double weighted =
          (static_cast<double>(left.size()) * oracle_gini(left, ds.num_classes) +
           static_cast<double>(right.size()) * oracle_gini(right, ds.num_classes)) /
          static_cast<double>(n);
      best = std::max(best, parent - weighted);
    }
  }
  return best;
}

} // namespace

TEST_CASE("node impurity matches the stated examples") {
  const Dataset pure = make_classification({{0, 0, 0}}, {1, 1, 1});
  const EncodedData dp = encode_plain(pure);
  const auto rows3 = all_rows(3);
  CHECK(node_impurity(dp, rows3).value == 0.0);

  const Dataset half = make_classification({{0, 0}}, {1, 2});
  const EncodedData dh = encode_plain(half);
  const auto rows2 = all_rows(2);
  CHECK(node_impurity(dh, rows2).value == doctest::Approx(0.5));

  const Dataset mix = make_classification({{0, 0, 0, 0, 0}}, {1, 1, 2, 2, 2});
  const EncodedData dm = encode_plain(mix);
  const auto rows5 = all_rows(5);
  CHECK(node_impurity(dm, rows5).value == doctest::Approx(0.48).epsilon(1e-12));
  CHECK(node_impurity(dm, rows5).weight == 5);
}

TEST_CASE("regression impurity is the population variance") {
  const Dataset ds = make_regression({{0, 0, 0, 0}}, {1.0, 2.0, 3.0, 4.0});
  const EncodedData data = encode_plain(ds);
  const auto rows = all_rows(4);
  CHECK(node_impurity(data, rows).value == doctest::Approx(1.25));
}

TEST_CASE("empty slice is a defined error") {
  const Dataset ds = make_classification({{0}}, {1});
  const EncodedData data = encode_plain(ds);
  const std::vector<size_t> empty;
  CHECK_THROWS_AS(node_impurity(data, empty), InvalidArgument);
}

TEST_CASE("constant covariate admits no threshold and yields a single leaf") {
  const Dataset ds = make_classification({{3, 3, 3, 3, 3, 3}}, {1, 2, 1, 2, 1, 2});
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  Rng rng(7);
  const TreeRoot root = generate_candidate_root(all_rows(6), {0}, data, hp, rng);
  CHECK(root.nodes.size() == 1);
  CHECK(root.nodes[0].is_leaf());
  CHECK(partition_criterion(root, data) == 0.0);
}

TEST_CASE("max_depth_root = 1 yields at most one split") {
  Rng data_rng(5);
  const Dataset ds = random_binary_dataset(30, 2, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 1;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const TreeRoot root = generate_candidate_root(all_rows(30), {0, 1}, data, hp, rng);
    CHECK(root.nodes.size() <= 3);
    for (const RootNode& nd : root.nodes) CHECK(nd.depth <= 1);
  }
}

TEST_CASE("root leaves partition the tree sample over 1000 random draws") {
  // 8 observations, 2 binary covariates, depth 2.
  const Dataset ds = make_classification(
      {{0, 0, 0, 0, 1, 1, 1, 1}, {0, 1, 0, 1, 0, 1, 0, 1}}, {1, 2, 1, 2, 2, 1, 2, 1});
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 2;
  const auto sample = all_rows(8);
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const TreeRoot root = generate_candidate_root(sample, {0, 1}, data, hp, rng);
    std::multiset<size_t> seen;
    for (size_t id = 0; id < root.nodes.size(); ++id) {
      if (!root.nodes[id].is_leaf()) continue;
      for (const size_t i : root.node_members(id)) seen.insert(i);
    }
    CHECK(seen == std::multiset<size_t>(sample.begin(), sample.end()));
  }
}

TEST_CASE("min_root_node bound holds for every generated child") {
  Rng data_rng(11);
  const Dataset ds = random_binary_dataset(40, 3, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp;
  hp.min_node_size = 5;  // min_root_node = 5
  hp.max_depth_root = 3;
  CHECK(min_root_node_size(hp) == 5);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const TreeRoot root = generate_candidate_root(all_rows(40), {0, 1, 2}, data, hp, rng);
    for (const RootNode& nd : root.nodes) {
      if (nd.depth > 0) CHECK(nd.end - nd.begin >= 5);
    }
  }
}

TEST_CASE("partition criterion special cases") {
  const Dataset ds = make_classification({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}},
                                         {1, 1, 1, 1, 1, 2, 2, 2, 2, 2});
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 3;

  SUBCASE("fully pure leaves recover the whole sample impurity") {
    // Split at 5.5 separates the classes perfectly.
    Rng rng(0);
    TreeRoot best;
    double best_score = -1;
    for (int cand = 0; cand < 200; ++cand) {
      TreeRoot root = generate_candidate_root(all_rows(10), {0}, data, hp, rng);
      const double s = partition_criterion(root, data);
      if (s > best_score) {
        best_score = s;
        best = std::move(root);
      }
    }
    CHECK(best_score == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("cached criterion equals the recomputed partition criterion") {
  Rng data_rng(61);
  const Dataset ds = random_binary_dataset(80, 3, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 3;
  hp.min_node_size = 4;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const TreeRoot root = generate_candidate_root(all_rows(80), {0, 1, 2}, data, hp, rng);
    CHECK(root.cached_criterion ==
          doctest::Approx(partition_criterion(root, data)).epsilon(1e-12));
  }
}

TEST_CASE("three-leaf criterion matches an independent recomputation") {
  Rng data_rng(21);
  const Dataset ds = random_binary_dataset(10, 2, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 2;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const TreeRoot root = generate_candidate_root(all_rows(10), {0, 1}, data, hp, rng);
    // Oracle: recompute from leaf label counts.
    double weighted = 0.0;
    for (size_t id = 0; id < root.nodes.size(); ++id) {
      if (!root.nodes[id].is_leaf()) continue;
      std::vector<int32_t> labels;
      for (const size_t i : root.node_members(id)) labels.push_back(ds.labels[i]);
      weighted += static_cast<double>(labels.size()) / 10.0 * oracle_gini(labels, 2);
    }
    const double expected = oracle_gini(ds.labels, 2) - weighted;
    CHECK(partition_criterion(root, data) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("select_best_root keeps the first of tied candidates") {
  Rng data_rng(3);
  const Dataset ds = random_binary_dataset(20, 2, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  Rng rng(17);
  TreeRoot a = generate_candidate_root(all_rows(20), {0, 1}, data, hp, rng);
  std::vector<TreeRoot> candidates;
  candidates.push_back(a);
  candidates.push_back(a);  // identical score
  CHECK(select_best_root(candidates, data) == 0);

  std::vector<TreeRoot> single;
  single.push_back(a);
  CHECK(select_best_root(single, data) == 0);
}

TEST_CASE("exhaustive single-split mode equals brute force enumeration") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 6 + rng.uniform_index(7);  // 6..12
    const size_t p = 1 + rng.uniform_index(2);
    const Dataset ds = random_binary_dataset(n, p, rng);
    const EncodedData data = encode_plain(ds);
    std::vector<size_t> covs;
    for (size_t c = 0; c < p; ++c) covs.push_back(c);
    const auto candidates = enumerate_single_split_roots(all_rows(n), covs, data, 1);
    const size_t best = select_best_root(candidates, data);
    const double got = partition_criterion(candidates[best], data);
    CHECK(got == doctest::Approx(brute_force_best_reduction(ds)).epsilon(1e-12));
  }
}

TEST_CASE("telescoping identity over random roots") {
  Rng rng(2024);
  const Dataset ds = random_binary_dataset(60, 3, rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 3;
  const auto sample = all_rows(60);
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng cand_rng(seed);
    const TreeRoot root = generate_candidate_root(sample, {0, 1, 2}, data, hp, cand_rng);
    double sum = 0.0;
    for (size_t id = 0; id < root.nodes.size(); ++id) {
      const RootNode& nd = root.nodes[id];
      if (nd.is_leaf()) continue;
      const auto node_imp = node_impurity(data, root.node_members(id));
      const auto left_imp =
          node_impurity(data, root.node_members(static_cast<size_t>(nd.left)));
      const auto right_imp =
          node_impurity(data, root.node_members(static_cast<size_t>(nd.right)));
      sum += static_cast<double>(node_imp.weight) * node_imp.value -
             static_cast<double>(left_imp.weight) * left_imp.value -
             static_cast<double>(right_imp.weight) * right_imp.value;
    }
    const double reduction = partition_criterion(root, data);
    CHECK(std::abs(reduction * 60.0 - sum) < 1e-9);
  }
}

TEST_CASE("adding a split never decreases the partition criterion") {
  Rng rng(31);
  const Dataset ds = random_binary_dataset(50, 2, rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp = small_hp();
  hp.max_depth_root = 2;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng cand_rng(seed);
    TreeRoot root = generate_candidate_root(all_rows(50), {0, 1}, data, hp, cand_rng);
    const double before = partition_criterion(root, data);
    // Split the first splittable leaf by hand.
    bool extended = false;
    for (size_t id = 0; id < root.nodes.size() && !extended; ++id) {
      RootNode& nd = root.nodes[id];
      if (!nd.is_leaf() || nd.end - nd.begin < 2) continue;
      const auto members = root.node_members(id);
      double lo = data.col[0][members[0]], hi = lo;
      for (const size_t i : members) {
        lo = std::min(lo, data.col[0][i]);
        hi = std::max(hi, data.col[0][i]);
      }
      if (lo == hi) continue;
      const double thr = 0.5 * (lo + hi);
      const size_t begin = nd.begin, end = nd.end;
      auto mid = std::stable_partition(
          root.members.begin() + static_cast<ptrdiff_t>(begin),
          root.members.begin() + static_cast<ptrdiff_t>(end),
          [&](size_t i) { return data.col[0][i] <= thr; });
      const size_t n_left = static_cast<size_t>(mid - root.members.begin()) - begin;
      if (n_left == 0 || n_left == end - begin) continue;
      const int32_t left_id = static_cast<int32_t>(root.nodes.size());
      root.nodes[id].covariate = 0;
      root.nodes[id].threshold = thr;
      root.nodes[id].left = left_id;
      root.nodes[id].right = left_id + 1;
      root.nodes.push_back({-1, -1, -1, 0.0, root.nodes[id].depth + 1, begin, begin + n_left});
      root.nodes.push_back({-1, -1, -1, 0.0, root.nodes[id].depth + 1, begin + n_left, end});
      extended = true;
    }
    if (!extended) continue;
    const double after = partition_criterion(root, data);
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("candidate generation and expansion are deterministic") {
  Rng data_rng(8);
  const Dataset ds = random_binary_dataset(80, 4, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp;
  hp.mtry = 2;
  hp.min_node_size = 5;

  auto build = [&]() {
    Rng cand_rng(derive_seed(7, rng_tag::kCandidate, 0, 0));
    TreeRoot root = generate_candidate_root(all_rows(80), {0, 1, 2, 3}, data, hp, cand_rng);
    Rng body_rng(derive_seed(7, rng_tag::kBodyExpand, 0));
    return expand_to_tree(root, data, hp, body_rng);
  };
  const Tree a = build();
  const Tree b = build();
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].covariate == b.nodes[i].covariate);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
    CHECK(a.nodes[i].left == b.nodes[i].left);
  }
}

TEST_CASE("expansion stops on purity and on min_node_size") {
  SUBCASE("pure root leaf grows no body") {
    const Dataset ds = make_classification({{1, 2, 3, 4}}, {1, 1, 1, 1});
    const EncodedData data = encode_plain(ds);
    TreeRoot root;
    root.members = all_rows(4);
    root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, 4});
    Hyperparams hp = small_hp();
    Rng rng(1);
    const Tree tree = expand_to_tree(root, data, hp, rng);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.leaf_summaries[0].class_counts == std::vector<int64_t>{4, 0});
  }
  SUBCASE("node of size 4 with min_node_size 5 becomes terminal") {
    const Dataset ds = make_classification({{1, 2, 3, 4}}, {1, 2, 1, 2});
    const EncodedData data = encode_plain(ds);
    TreeRoot root;
    root.members = all_rows(4);
    root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, 4});
    Hyperparams hp = small_hp();
    hp.min_node_size = 5;
    Rng rng(1);
    const Tree tree = expand_to_tree(root, data, hp, rng);
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
  }
}

TEST_CASE("separable data is fit perfectly in-bag") {
  // Linearly separable two-class data, n = 60.
  std::vector<double> x(60);
  std::vector<int32_t> labels(60);
  Rng rng(15);
  for (size_t i = 0; i < 60; ++i) {
    const bool second = i % 2 == 1;
    x[i] = (second ? 2.0 : -2.0) + rng.uniform_double();
    labels[i] = second ? 2 : 1;
  }
  const Dataset ds = make_classification({x}, labels);
  const EncodedData data = encode_plain(ds);
  TreeRoot root;
  root.members = all_rows(60);
  root.nodes.push_back({-1, -1, -1, 0.0, 0, 0, 60});
  Hyperparams hp = small_hp();
  Rng body_rng(3);
  const Tree tree = expand_to_tree(root, data, hp, body_rng);
  int errors = 0;
  for (size_t i = 0; i < 60; ++i) {
    const size_t leaf = tree.route_encoded(data, i);
    const auto& counts = tree.leaf_summaries[static_cast<size_t>(tree.nodes[leaf].leaf)]
                             .class_counts;
    const int32_t pred = counts[0] >= counts[1] ? 1 : 2;
    if (pred != labels[i]) ++errors;
  }
  CHECK(errors == 0);
}

TEST_CASE("every observation lands in exactly one terminal leaf") {
  Rng data_rng(44);
  const Dataset ds = random_binary_dataset(100, 3, data_rng);
  const EncodedData data = encode_plain(ds);
  Hyperparams hp;
  hp.mtry = 2;
  hp.min_node_size = 3;
  hp.max_depth_root = 2;
  Rng cand_rng(2);
  TreeRoot root = generate_candidate_root(all_rows(100), {0, 1}, data, hp, cand_rng);
  Rng body_rng(4);
  const Tree tree = expand_to_tree(root, data, hp, body_rng);
  std::map<size_t, int> leaf_hits;
  int64_t total = 0;
  for (size_t i = 0; i < 100; ++i) {
    const size_t leaf = tree.route_encoded(data, i);
    CHECK(tree.nodes[leaf].is_leaf());
    ++leaf_hits[leaf];
    ++total;
  }
  CHECK(total == 100);
  int64_t leaf_total = 0;
  for (const LeafSummary& leaf : tree.leaf_summaries) leaf_total += leaf.count;
  CHECK(leaf_total == 100);
}
