#include "unityforest/crtr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

namespace unityforest {

BestRootSet select_best_tree_roots(const std::vector<SplitScoreRecord>& oob_records,
                                   size_t covariate, double prop_best_splits) {
  BestRootSet out;
  out.covariate = covariate;
  std::vector<SplitScoreRecord> on_covariate;
  for (const SplitScoreRecord& rec : oob_records) {
    if (static_cast<size_t>(rec.covariate) == covariate) on_covariate.push_back(rec);
  }
  out.selected_nodes = select_top_splits(std::move(on_covariate), prop_best_splits);
  std::set<size_t> trees;
  for (const SplitScoreRecord& rec : out.selected_nodes) trees.insert(rec.tree);
  out.tree_ids.assign(trees.begin(), trees.end());
  return out;
}

double tree_root_distance(const Tree& a, const Tree& b, int max_depth_root) {
  const std::vector<int32_t> la = a.root_covariate_layout(max_depth_root);
  const std::vector<int32_t> lb = b.root_covariate_layout(max_depth_root);
  double mismatch = 0.0;
  size_t pos = 0;
  for (int depth = 0; depth < max_depth_root; ++depth) {
    const double w = std::ldexp(1.0, -depth);  // 2^-depth
    const size_t level = size_t{1} << depth;
    for (size_t k = 0; k < level; ++k, ++pos) {
      if (la[pos] != lb[pos]) mismatch += w;
    }
  }
  return mismatch / static_cast<double>(max_depth_root);
}

double covariate_score(double freq_best, double freq_all) {
  if (freq_best == 0.0 && freq_all == 0.0) return 0.5;
  return freq_best / (freq_best + freq_all);
}

namespace {

// Relative frequency of each covariate among the internal root nodes of the
// given trees (counts over all internal root node instances).
std::vector<double> root_split_frequencies(const Forest& forest,
                                           const std::vector<size_t>& tree_ids) {
  std::vector<double> freq(forest.p, 0.0);
  int64_t total = 0;
  for (const size_t t : tree_ids) {
    for (const Node& nd : forest.trees[t].nodes) {
      if (!nd.in_root) continue;
      freq[static_cast<size_t>(nd.covariate)] += 1.0;
      ++total;
    }
  }
  if (total > 0) {
    for (double& f : freq) f /= static_cast<double>(total);
  }
  return freq;
}

} // namespace

CrtrReport select_crtr(const Forest& forest, const EncodedData& data,
                       const BestRootSet& best_roots) {
  CrtrReport report;
  report.covariate = best_roots.covariate;
  report.covariate_name = forest.covariates[best_roots.covariate].name;
  report.best_tree_ids = best_roots.tree_ids;
  if (best_roots.tree_ids.empty()) {
    report.available = false;
    return report;
  }
  report.available = true;

  // Medoid under the root distance; tree ids ascend, so strict comparison
  // keeps the lowest id on ties.
  const auto& ids = best_roots.tree_ids;
  size_t medoid = ids[0];
  double best_sum = std::numeric_limits<double>::infinity();
  for (const size_t a : ids) {
    double sum = 0.0;
    for (const size_t b : ids) {
      sum += tree_root_distance(forest.trees[a], forest.trees[b], forest.hp.max_depth_root);
    }
    if (sum < best_sum) {
      best_sum = sum;
      medoid = a;
    }
  }
  report.tree_id = medoid;
  const Tree& tree = forest.trees[medoid];

  std::vector<size_t> all_trees(forest.trees.size());
  for (size_t t = 0; t < forest.trees.size(); ++t) all_trees[t] = t;
  const std::vector<double> freq_best = root_split_frequencies(forest, ids);
  const std::vector<double> freq_all = root_split_frequencies(forest, all_trees);

  std::set<size_t> top_nodes;
  for (const SplitScoreRecord& rec : best_roots.selected_nodes) {
    if (rec.tree == medoid) top_nodes.insert(rec.node);
  }

  const auto inbag_members = route_root_memberships(tree, data, tree.inbag);

  // Root part of the tree: internal root nodes plus their children.
  std::vector<size_t> part;
  std::vector<int> depth_of(tree.nodes.size(), 0);
  {
    std::vector<size_t> stack{0};
    while (!stack.empty()) {
      const size_t id = stack.back();
      stack.pop_back();
      part.push_back(id);
      const Node& nd = tree.nodes[id];
      if (nd.in_root) {
        depth_of[static_cast<size_t>(nd.right)] = depth_of[id] + 1;
        depth_of[static_cast<size_t>(nd.left)] = depth_of[id] + 1;
        stack.push_back(static_cast<size_t>(nd.right));
        stack.push_back(static_cast<size_t>(nd.left));
      }
    }
    std::sort(part.begin(), part.end());
  }

  // Unshaded nodes: top-scoring nodes and their ancestors.
  std::set<size_t> unshaded(top_nodes.begin(), top_nodes.end());
  std::vector<int32_t> parent(tree.nodes.size(), -1);
  for (const size_t id : part) {
    const Node& nd = tree.nodes[id];
    if (nd.in_root) {
      parent[static_cast<size_t>(nd.left)] = static_cast<int32_t>(id);
      parent[static_cast<size_t>(nd.right)] = static_cast<int32_t>(id);
    }
  }
  for (const size_t id : top_nodes) {
    int32_t up = parent[id];
    while (up >= 0) {
      unshaded.insert(static_cast<size_t>(up));
      up = parent[static_cast<size_t>(up)];
    }
  }

  std::vector<int32_t> report_index(tree.nodes.size(), -1);
  for (size_t k = 0; k < part.size(); ++k) report_index[part[k]] = static_cast<int32_t>(k);

  for (const size_t id : part) {
    const Node& nd = tree.nodes[id];
    CrtrNode cn;
    cn.node_id = id;
    cn.depth = depth_of[id];
    cn.internal = nd.in_root;
    if (nd.in_root) {
      cn.split_covariate = nd.covariate;
      cn.split_name = forest.covariates[static_cast<size_t>(nd.covariate)].name;
      cn.threshold = nd.threshold;
      cn.score = covariate_score(freq_best[static_cast<size_t>(nd.covariate)],
                                 freq_all[static_cast<size_t>(nd.covariate)]);
      cn.left = report_index[static_cast<size_t>(nd.left)];
      cn.right = report_index[static_cast<size_t>(nd.right)];
      const CovariateInfo& cov = forest.covariates[static_cast<size_t>(nd.covariate)];
      if (cov.kind == CovariateKind::Nominal) {
        const CategoryOrdering& ord = forest.orderings[static_cast<size_t>(nd.covariate)];
        for (int cat = 1; cat <= cov.num_categories; ++cat) {
          if (static_cast<double>(ord.rank(cat)) <= nd.threshold) {
            cn.left_categories.push_back(cov.category_values[static_cast<size_t>(cat - 1)]);
          }
        }
      }
    }
    cn.top_split = top_nodes.count(id) > 0;
    cn.shaded = unshaded.count(id) == 0;
    const auto& members = inbag_members[id];
    cn.n_inbag = static_cast<int64_t>(members.size());
    if (data.task == Task::Classification) {
      cn.class_proportions.assign(static_cast<size_t>(data.num_classes), 0.0);
      for (const size_t i : members) {
        cn.class_proportions[static_cast<size_t>(data.label[i] - 1)] += 1.0;
      }
      if (!members.empty()) {
        for (double& v : cn.class_proportions) v /= static_cast<double>(members.size());
      }
    } else {
      double sum = 0.0;
      for (const size_t i : members) sum += data.y[i];
      cn.mean = members.empty() ? 0.0 : sum / static_cast<double>(members.size());
    }
    report.nodes.push_back(std::move(cn));
  }

  // Class-conditional covariate distributions at the top-scoring nodes.
  const size_t j = best_roots.covariate;
  const CovariateInfo& cov = forest.covariates[j];
  for (const size_t id : top_nodes) {
    const auto& members = inbag_members[id];
    if (members.empty()) continue;
    CovariateNodeSummary summary;
    summary.node_id = id;
    const size_t K = data.task == Task::Classification
                         ? static_cast<size_t>(data.num_classes)
                         : 1;
    if (cov.kind == CovariateKind::Nominal) {
      summary.nominal = true;
      summary.category_values = cov.category_values;
      summary.counts.assign(K, std::vector<int64_t>(cov.category_values.size(), 0));
      for (const size_t i : members) {
        const size_t cls =
            data.task == Task::Classification ? static_cast<size_t>(data.label[i] - 1) : 0;
        // data.col holds ordered ranks; recover the raw category index.
        const int rank = static_cast<int>(data.col[j][i]);
        for (int cat = 1; cat <= cov.num_categories; ++cat) {
          if (forest.orderings[j].rank(cat) == rank) {
            ++summary.counts[cls][static_cast<size_t>(cat - 1)];
            break;
          }
        }
      }
    } else {
      constexpr size_t kBins = 25;
      double lo = data.col[j][members[0]];
      double hi = lo;
      for (const size_t i : members) {
        lo = std::min(lo, data.col[j][i]);
        hi = std::max(hi, data.col[j][i]);
      }
      summary.bin_low = lo;
      summary.bin_width = hi > lo ? (hi - lo) / static_cast<double>(kBins) : 1.0;
      summary.counts.assign(K, std::vector<int64_t>(kBins, 0));
      for (const size_t i : members) {
        const size_t cls =
            data.task == Task::Classification ? static_cast<size_t>(data.label[i] - 1) : 0;
        size_t bin = static_cast<size_t>((data.col[j][i] - lo) / summary.bin_width);
        bin = std::min(bin, kBins - 1);
        ++summary.counts[cls][bin];
      }
    }
    report.top_node_summaries.push_back(std::move(summary));
  }
  std::sort(report.top_node_summaries.begin(), report.top_node_summaries.end(),
            [](const auto& a, const auto& b) { return a.node_id < b.node_id; });
  return report;
}

std::string crtr_report_to_json(const CrtrReport& report) {
  nlohmann::json j;
  j["covariate"] = report.covariate_name;
  j["covariate_index"] = report.covariate;
  j["available"] = report.available;
  if (!report.available) {
    j["reason"] = "no tree-root splits on this covariate";
    return j.dump(2) + "\n";
  }
  j["tree_id"] = report.tree_id;
  j["best_tree_ids"] = report.best_tree_ids;
  nlohmann::json nodes = nlohmann::json::array();
  for (const CrtrNode& cn : report.nodes) {
    nlohmann::json nj;
    nj["id"] = cn.node_id;
    nj["depth"] = cn.depth;
    nj["n_inbag"] = cn.n_inbag;
    nj["top_split"] = cn.top_split;
    nj["shaded"] = cn.shaded;
    if (cn.internal) {
      nj["split_covariate"] = cn.split_covariate;
      nj["split_name"] = cn.split_name;
      nj["threshold"] = cn.threshold;
      nj["covariate_score"] = cn.score;
      nj["children"] = {cn.left, cn.right};
      if (!cn.left_categories.empty()) nj["left_categories"] = cn.left_categories;
    }
    if (!cn.class_proportions.empty()) {
      nj["class_proportions"] = cn.class_proportions;
    } else {
      nj["mean"] = cn.mean;
    }
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  nlohmann::json summaries = nlohmann::json::array();
  for (const CovariateNodeSummary& s : report.top_node_summaries) {
    nlohmann::json sj;
    sj["node_id"] = s.node_id;
    sj["nominal"] = s.nominal;
    if (s.nominal) {
      sj["categories"] = s.category_values;
    } else {
      sj["bin_low"] = s.bin_low;
      sj["bin_width"] = s.bin_width;
    }
    sj["class_counts"] = s.counts;
    summaries.push_back(std::move(sj));
  }
  j["top_node_covariate_summaries"] = std::move(summaries);
  return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string node_outcome_label(const CrtrNode& cn) {
  std::string label;
  if (!cn.class_proportions.empty()) {
    if (cn.class_proportions.size() == 2) {
      label = "P(2)=" + fixed(cn.class_proportions[1], 2);
    } else {
      label = "P=(";
      for (size_t k = 0; k < cn.class_proportions.size(); ++k) {
        if (k > 0) label += ",";
        label += fixed(cn.class_proportions[k], 2);
      }
      label += ")";
    }
  } else {
    label = "mean=" + fixed(cn.mean, 3);
  }
  return label + ", N=" + std::to_string(cn.n_inbag);
}

} // namespace

std::string crtr_report_to_dot(const CrtrReport& report) {
  std::string dot;
  dot += "digraph crtr_" + std::to_string(report.covariate) + " {\n";
  dot += "  graph [rankdir=TB, label=\"CRTR for " + report.covariate_name + "\"];\n";
  dot += "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
  if (!report.available) {
    dot += "  n0 [label=\"no CRTR available\", fillcolor=white];\n";
    dot += "}\n";
    return dot;
  }
  for (size_t k = 0; k < report.nodes.size(); ++k) {
    const CrtrNode& cn = report.nodes[k];
    std::string label;
    if (cn.internal) {
      label = cn.split_name + "\\n" + node_outcome_label(cn);
    } else {
      label = node_outcome_label(cn);
    }
    const std::string fill = cn.shaded ? "gray85" : "white";
    dot += "  n" + std::to_string(k) + " [label=\"" + label + "\", fillcolor=" + fill + "];\n";
  }
  for (size_t k = 0; k < report.nodes.size(); ++k) {
    const CrtrNode& cn = report.nodes[k];
    if (!cn.internal) continue;
    const double penwidth = 0.5 + 4.0 * cn.score;
    const std::string style = cn.top_split ? ", style=dashed" : "";
    std::string left_label, right_label;
    if (cn.left_categories.empty()) {
      left_label = "<= " + fixed(cn.threshold, 4);
      right_label = "> " + fixed(cn.threshold, 4);
    } else {
      left_label = "in {";
      for (size_t q = 0; q < cn.left_categories.size(); ++q) {
        if (q > 0) left_label += ",";
        left_label += format_double(cn.left_categories[q]);
      }
      left_label += "}";
      right_label = "otherwise";
    }
    dot += "  n" + std::to_string(k) + " -> n" + std::to_string(cn.left) + " [label=\"" +
           left_label + "\", penwidth=" + fixed(penwidth, 3) + style + "];\n";
    dot += "  n" + std::to_string(k) + " -> n" + std::to_string(cn.right) + " [label=\"" +
           right_label + "\", penwidth=" + fixed(penwidth, 3) + style + "];\n";
  }
  dot += "}\n";
  return dot;
}

void export_crtr(const CrtrReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/crtr_" + report.covariate_name;
  {
    std::ofstream out(base + ".json", std::ios::binary);
    if (!out) throw IoError("cannot write file: " + base + ".json");
    out << crtr_report_to_json(report);
    if (!out) throw IoError("write failed: " + base + ".json");
  }
  {
    std::ofstream out(base + ".dot", std::ios::binary);
    if (!out) throw IoError("cannot write file: " + base + ".dot");
    out << crtr_report_to_dot(report);
    if (!out) throw IoError("write failed: " + base + ".dot");
  }
}

} // namespace unityforest
