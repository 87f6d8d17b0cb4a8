#include "unityforest/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace unityforest {

using nlohmann::json;

namespace {

json covariate_to_json(const CovariateInfo& cov, const CategoryOrdering& ord) {
  json j;
  j["name"] = cov.name;
  if (cov.kind == CovariateKind::Nominal) {
    j["kind"] = "nominal";
    j["categories"] = cov.category_values;
    j["ranks"] = ord.rank_of_category;
  } else {
    j["kind"] = "continuous";
  }
  return j;
}

json tree_to_json(const Tree& tree, Task task) {
  json j;
  j["inbag"] = tree.inbag;
  json nodes = json::array();
  for (const Node& nd : tree.nodes) {
    nodes.push_back({nd.left, nd.right, nd.covariate, nd.threshold,
                     static_cast<int>(nd.in_root), nd.leaf});
  }
  j["nodes"] = std::move(nodes);
  json leaves = json::array();
  for (const LeafSummary& leaf : tree.leaf_summaries) {
    if (task == Task::Classification) {
      leaves.push_back(leaf.class_counts);
    } else {
      leaves.push_back({leaf.mean, leaf.count});
    }
  }
  j["leaves"] = std::move(leaves);
  return j;
}

Tree tree_from_json(const json& j, Task task, size_t n_train) {
  Tree tree;
  tree.inbag = j.at("inbag").get<std::vector<size_t>>();
  if (tree.inbag.size() > n_train ||
      (!tree.inbag.empty() && tree.inbag.back() >= n_train)) {
    throw ValidationError("malformed model file: in-bag indices out of range");
  }
  for (const auto& nj : j.at("nodes")) {
    Node nd;
    nd.left = nj.at(0).get<int32_t>();
    nd.right = nj.at(1).get<int32_t>();
    nd.covariate = nj.at(2).get<int32_t>();
    nd.threshold = nj.at(3).get<double>();
    nd.in_root = nj.at(4).get<int>() != 0;
    nd.leaf = nj.at(5).get<int32_t>();
    tree.nodes.push_back(nd);
  }
  for (const auto& lj : j.at("leaves")) {
    LeafSummary leaf;
    if (task == Task::Classification) {
      leaf.class_counts = lj.get<std::vector<int64_t>>();
      leaf.count = 0;
      for (const int64_t c : leaf.class_counts) leaf.count += c;
    } else {
      leaf.mean = lj.at(0).get<double>();
      leaf.count = lj.at(1).get<int64_t>();
    }
    tree.leaf_summaries.push_back(std::move(leaf));
  }
  tree.oob.reserve(n_train - tree.inbag.size());
  auto it = tree.inbag.begin();
  for (size_t i = 0; i < n_train; ++i) {
    if (it != tree.inbag.end() && *it == i) {
      ++it;
    } else {
      tree.oob.push_back(i);
    }
  }
  return tree;
}

} // namespace

std::string model_to_json(const Forest& forest) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["model"] = "unityforest";
  j["task"] = task_name(forest.task);
  j["num_classes"] = forest.num_classes;
  j["num_obs"] = forest.n_train;
  j["outcome_name"] = forest.outcome_name;
  j["root_mode"] = forest.root_mode == RootMode::Unity ? "unity" : "plain_cart";
  json hp;
  hp["fract_n"] = forest.hp.fract_n;
  hp["prop_var"] = forest.hp.prop_var;
  hp["n_cand_trees"] = forest.hp.n_cand_trees;
  hp["max_depth_root"] = forest.hp.max_depth_root;
  hp["mtry"] = forest.hp.mtry;
  hp["prop_best_splits"] = forest.hp.prop_best_splits;
  hp["num_trees"] = forest.hp.num_trees;
  hp["min_node_size"] = forest.hp.min_node_size;
  hp["seed"] = forest.hp.seed;
  j["hyperparams"] = std::move(hp);
  json covs = json::array();
  for (size_t c = 0; c < forest.p; ++c) {
    covs.push_back(covariate_to_json(forest.covariates[c], forest.orderings[c]));
  }
  j["covariates"] = std::move(covs);
  json trees = json::array();
  for (const Tree& tree : forest.trees) trees.push_back(tree_to_json(tree, forest.task));
  j["trees"] = std::move(trees);
  return j.dump();
}

namespace {

Forest forest_from_checked_json(const json& j) {
  Forest forest;
  forest.task = j.at("task").get<std::string>() == "regression" ? Task::Regression
                                                                : Task::Classification;
  forest.num_classes = j.at("num_classes").get<int>();
  forest.n_train = j.at("num_obs").get<size_t>();
  forest.outcome_name = j.at("outcome_name").get<std::string>();
  forest.root_mode =
      j.at("root_mode").get<std::string>() == "plain_cart" ? RootMode::PlainCart : RootMode::Unity;
  const json& hp = j.at("hyperparams");
  forest.hp.fract_n = hp.at("fract_n").get<double>();
  forest.hp.prop_var = hp.at("prop_var").get<double>();
  forest.hp.n_cand_trees = hp.at("n_cand_trees").get<int>();
  forest.hp.max_depth_root = hp.at("max_depth_root").get<int>();
  forest.hp.mtry = hp.at("mtry").get<int>();
  forest.hp.prop_best_splits = hp.at("prop_best_splits").get<double>();
  forest.hp.num_trees = hp.at("num_trees").get<int>();
  forest.hp.min_node_size = hp.at("min_node_size").get<int>();
  forest.hp.seed = hp.at("seed").get<uint64_t>();
  for (const auto& cj : j.at("covariates")) {
    CovariateInfo cov;
    CategoryOrdering ord;
    cov.name = cj.at("name").get<std::string>();
    if (cj.at("kind").get<std::string>() == "nominal") {
      cov.kind = CovariateKind::Nominal;
      cov.category_values = cj.at("categories").get<std::vector<double>>();
      cov.num_categories = static_cast<int>(cov.category_values.size());
      ord.rank_of_category = cj.at("ranks").get<std::vector<int>>();
    } else {
      cov.kind = CovariateKind::Continuous;
    }
    ord.covariate = forest.covariates.size();
    forest.covariates.push_back(std::move(cov));
    forest.orderings.push_back(std::move(ord));
  }
  forest.p = forest.covariates.size();
  for (const auto& tj : j.at("trees")) {
    forest.trees.push_back(tree_from_json(tj, forest.task, forest.n_train));
  }
  return forest;
}

} // namespace

Forest model_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("invalid model JSON: ") + e.what());
  }
  if (!j.contains("format_version")) {
    throw ValidationError("model file lacks the mandatory format_version field");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw ValidationError("unsupported model format_version " + std::to_string(version));
  }
  try {
    return forest_from_checked_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << model_to_json(forest);
  out << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Forest load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

} // namespace unityforest
