#include "unityforest_c.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "unityforest/crtr.hpp"
#include "unityforest/cv.hpp"
#include "unityforest/importance.hpp"
#include "unityforest/parallel.hpp"
#include "unityforest/serialize.hpp"
#include "unityforest/simulate.hpp"

using namespace unityforest;

struct ufo_dataset {
  Dataset ds;
};

struct ufo_model {
  Forest forest;
};

namespace {

thread_local std::string g_last_error;

ufo_status fail(ufo_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
ufo_status guarded(F&& fn) {
  try {
    fn();
    return UFO_OK;
  } catch (const InvalidArgument& e) {
    return fail(UFO_E_INVALID_ARGUMENT, e.what());
  } catch (const ValidationError& e) {
    return fail(UFO_E_VALIDATION, e.what());
  } catch (const IoError& e) {
    return fail(UFO_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(UFO_E_INTERNAL, e.what());
  }
}

Hyperparams params_to_hyperparams(const ufo_params& p, size_t n_covariates, Task task) {
  Hyperparams hp;
  const Hyperparams defaults = default_hyperparams(n_covariates, task);
  hp.fract_n = p.fract_n > 0 ? p.fract_n : defaults.fract_n;
  hp.prop_var = p.prop_var > 0 ? p.prop_var : defaults.prop_var;
  hp.n_cand_trees = p.n_cand_trees > 0 ? static_cast<int>(p.n_cand_trees) : defaults.n_cand_trees;
  hp.max_depth_root =
      p.max_depth_root > 0 ? static_cast<int>(p.max_depth_root) : defaults.max_depth_root;
  hp.mtry = p.mtry > 0 ? static_cast<int>(p.mtry) : defaults.mtry;
  hp.prop_best_splits = p.prop_best_splits > 0 ? p.prop_best_splits : defaults.prop_best_splits;
  hp.num_trees = p.num_trees > 0 ? static_cast<int>(p.num_trees) : defaults.num_trees;
  hp.min_node_size =
      p.min_node_size > 0 ? static_cast<int>(p.min_node_size) : defaults.min_node_size;
  hp.seed = p.seed;
  return hp;
}

void write_vim_csv(const Forest& forest, const Dataset& ds, uint64_t perm_seed,
                   bool with_baseline, const std::string& out_csv, int workers) {
  const EncodedData data = forest.encode(ds);
  const VimResult vim = unity_vim(forest, data, perm_seed, workers);
  std::vector<double> baseline;
  if (with_baseline) {
    baseline = permutation_vim_baseline(forest, data, perm_seed, workers);
  }
  const std::vector<size_t> ranks = vim_ranks(vim.values);
  std::vector<size_t> order(forest.p);
  for (size_t c = 0; c < forest.p; ++c) order[ranks[c] - 1] = c;

  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + out_csv);
  out << "covariate,unity_vim,rank,n_selected_splits";
  if (with_baseline) out << ",perm_baseline";
  out << '\n';
  for (const size_t c : order) {
    out << forest.covariates[c].name << ',' << format_double(vim.values[c]) << ',' << ranks[c]
        << ',' << vim.selected[c].size();
    if (with_baseline) out << ',' << format_double(baseline[c]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + out_csv);
}

ufo_params params_from_json(const nlohmann::json& j) {
  ufo_params p;
  ufo_params_init(&p);
  if (j.contains("fract_n")) p.fract_n = j.at("fract_n").get<double>();
  if (j.contains("prop_var")) p.prop_var = j.at("prop_var").get<double>();
  if (j.contains("n_cand_trees")) p.n_cand_trees = j.at("n_cand_trees").get<int64_t>();
  if (j.contains("max_depth_root")) p.max_depth_root = j.at("max_depth_root").get<int64_t>();
  if (j.contains("mtry")) p.mtry = j.at("mtry").get<int64_t>();
  if (j.contains("prop_best_splits")) {
    p.prop_best_splits = j.at("prop_best_splits").get<double>();
  }
  if (j.contains("num_trees")) p.num_trees = j.at("num_trees").get<int64_t>();
  if (j.contains("min_node_size")) p.min_node_size = j.at("min_node_size").get<int64_t>();
  if (j.contains("seed")) p.seed = j.at("seed").get<uint64_t>();
  return p;
}

} // namespace

extern "C" {

const char* ufo_version(void) { return "1.0.0"; }

const char* ufo_last_error(void) { return g_last_error.c_str(); }

ufo_status ufo_dataset_open_csv(const char* csv_path, const char* schema_json,
                                ufo_dataset** out) {
  if (csv_path == nullptr || schema_json == nullptr || out == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const SchemaDecl schema = SchemaDecl::from_json(schema_json);
    auto handle = std::make_unique<ufo_dataset>();
    handle->ds = load_dataset_csv(csv_path, schema);
    *out = handle.release();
  });
}

void ufo_dataset_close(ufo_dataset* ds) { delete ds; }

ufo_status ufo_dataset_dims(const ufo_dataset* ds, int64_t* n, int64_t* p) {
  if (ds == nullptr) return fail(UFO_E_INVALID_ARGUMENT, "null dataset");
  if (n != nullptr) *n = static_cast<int64_t>(ds->ds.n);
  if (p != nullptr) *p = static_cast<int64_t>(ds->ds.p);
  return UFO_OK;
}

void ufo_params_init(ufo_params* params) {
  if (params == nullptr) return;
  params->fract_n = -1.0;
  params->prop_var = -1.0;
  params->n_cand_trees = -1;
  params->max_depth_root = -1;
  params->mtry = -1;
  params->prop_best_splits = -1.0;
  params->num_trees = -1;
  params->min_node_size = -1;
  params->seed = 1;
  params->workers = 0;
  params->plain_cart = 0;
}

ufo_status ufo_train(const ufo_dataset* ds, const ufo_params* params, ufo_model** out) {
  if (ds == nullptr || params == nullptr || out == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const Hyperparams hp = params_to_hyperparams(*params, ds->ds.p, ds->ds.task);
    const RootMode mode = params->plain_cart != 0 ? RootMode::PlainCart : RootMode::Unity;
    auto handle = std::make_unique<ufo_model>();
    handle->forest = train(ds->ds, hp, mode, static_cast<int>(params->workers));
    *out = handle.release();
  });
}

ufo_status ufo_model_save(const ufo_model* model, const char* path) {
  if (model == nullptr || path == nullptr) return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] { save_model(model->forest, path); });
}

ufo_status ufo_model_load(const char* path, ufo_model** out) {
  if (path == nullptr || out == nullptr) return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto handle = std::make_unique<ufo_model>();
    handle->forest = load_model(path);
    *out = handle.release();
  });
}

void ufo_model_close(ufo_model* model) { delete model; }

ufo_status ufo_model_info_json(const ufo_model* model, char** out_json) {
  if (model == nullptr || out_json == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    nlohmann::json j;
    j["task"] = task_name(model->forest.task);
    j["num_classes"] = model->forest.num_classes;
    j["num_trees"] = model->forest.trees.size();
    j["num_covariates"] = model->forest.p;
    j["num_obs"] = model->forest.n_train;
    j["root_mode"] = model->forest.root_mode == RootMode::Unity ? "unity" : "plain_cart";
    const std::string text = j.dump();
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (buf == nullptr) throw Error("out of memory");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_json = buf;
  });
}

void ufo_string_free(char* s) { std::free(s); }

ufo_status ufo_oob_error(const ufo_model* model, const ufo_dataset* ds, double* out) {
  if (model == nullptr || ds == nullptr || out == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] { *out = oob_error(model->forest, ds->ds, 0); });
}

ufo_status ufo_predict_csv(const ufo_model* model, const char* data_csv, const char* out_csv,
                           int64_t workers) {
  if (model == nullptr || data_csv == nullptr || out_csv == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const Forest& forest = model->forest;
    const auto rows = load_covariate_rows_csv(forest, data_csv);
    std::vector<std::string> lines(rows.size());
    parallel_for(static_cast<int64_t>(rows.size()), static_cast<int>(workers), [&](int64_t i) {
      const auto& row = rows[static_cast<size_t>(i)];
      std::string& line = lines[static_cast<size_t>(i)];
      if (forest.task == Task::Classification) {
        line = std::to_string(predict_label(forest, row));
        for (const double pr : predict_proba(forest, row)) {
          line += ',';
          line += format_double(pr);
        }
      } else {
        line = format_double(predict_regression(forest, row));
      }
    });
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + std::string(out_csv));
    if (forest.task == Task::Classification) {
      out << "prediction";
      for (int k = 1; k <= forest.num_classes; ++k) out << ",prob_" << k;
      out << '\n';
    } else {
      out << "prediction\n";
    }
    for (const std::string& line : lines) out << line << '\n';
    if (!out) throw IoError("write failed: " + std::string(out_csv));
  });
}

ufo_status ufo_vim_csv(const ufo_model* model, const ufo_dataset* ds, uint64_t perm_seed,
                       int32_t with_baseline, const char* out_csv, int64_t workers) {
  if (model == nullptr || ds == nullptr || out_csv == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    write_vim_csv(model->forest, ds->ds, perm_seed, with_baseline != 0, out_csv,
                  static_cast<int>(workers));
  });
}

ufo_status ufo_crtr_export(const ufo_model* model, const ufo_dataset* ds,
                           const char* covariates_csv, int64_t top_k, uint64_t perm_seed,
                           const char* out_dir, int64_t workers) {
  if (model == nullptr || ds == nullptr || out_dir == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    const Forest& forest = model->forest;
    const EncodedData data = forest.encode(ds->ds);
    const int w = static_cast<int>(workers);
    std::filesystem::create_directories(out_dir);

    std::vector<size_t> targets;
    if (covariates_csv != nullptr && covariates_csv[0] != '\0') {
      std::string text(covariates_csv);
      size_t pos = 0;
      while (pos <= text.size()) {
        const size_t comma = text.find(',', pos);
        const std::string name =
            text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        bool found = false;
        for (size_t c = 0; c < forest.p; ++c) {
          if (forest.covariates[c].name == name) {
            targets.push_back(c);
            found = true;
            break;
          }
        }
        if (!found) throw ValidationError("unknown covariate '" + name + "'");
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else {
      const VimResult vim = unity_vim(forest, data, perm_seed, w);
      const std::vector<size_t> ranks = vim_ranks(vim.values);
      const size_t k = std::min<size_t>(top_k > 0 ? static_cast<size_t>(top_k) : 5, forest.p);
      targets.resize(forest.p);
      for (size_t c = 0; c < forest.p; ++c) targets[ranks[c] - 1] = c;
      targets.resize(k);
    }

    const auto oob_records = collect_oob_split_scores(forest, data, w);
    nlohmann::json index = nlohmann::json::array();
    for (const size_t c : targets) {
      const BestRootSet best = select_best_tree_roots(oob_records, c, forest.hp.prop_best_splits);
      const CrtrReport report = select_crtr(forest, data, best);
      export_crtr(report, out_dir);
      nlohmann::json entry;
      entry["covariate"] = forest.covariates[c].name;
      entry["available"] = report.available;
      if (report.available) entry["tree_id"] = report.tree_id;
      index.push_back(entry);
    }
    std::ofstream out(std::string(out_dir) + "/crtr_index.json", std::ios::binary);
    if (!out) throw IoError("cannot write file: " + std::string(out_dir) + "/crtr_index.json");
    out << index.dump(2) << '\n';
    if (!out) throw IoError("write failed: crtr_index.json");
  });
}

ufo_status ufo_benchmark_run(const char* config_json, const char* out_metrics_csv,
                             const char* out_summary_csv) {
  if (config_json == nullptr || out_metrics_csv == nullptr || out_summary_csv == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("invalid benchmark config: ") + e.what());
    }
    std::vector<BenchmarkDataset> datasets;
    for (const auto& dj : j.at("datasets")) {
      BenchmarkDataset bd;
      bd.csv_path = dj.at("csv").get<std::string>();
      bd.schema_path = dj.at("schema").get<std::string>();
      bd.name = dj.value("name", bd.csv_path);
      datasets.push_back(std::move(bd));
    }
    const int folds = j.value("folds", 5);
    const int repeats = j.value("repeats", 5);
    const uint64_t seed = j.value("seed", uint64_t{1});
    const int workers = j.value("workers", 0);
    ufo_params p;
    ufo_params_init(&p);
    if (j.contains("params")) p = params_from_json(j.at("params"));
    p.seed = seed;

    LearnerConfig ufo_learner;
    // Defaults resolve per dataset inside cross_validate; keep sentinels.
    ufo_learner.hp = params_to_hyperparams(p, 10000, Task::Classification);
    if (p.prop_var <= 0) ufo_learner.hp.prop_var = 0.0;
    if (p.mtry <= 0) ufo_learner.hp.mtry = 0;
    ufo_learner.mode = RootMode::Unity;
    LearnerConfig rf_learner = ufo_learner;
    rf_learner.mode = RootMode::PlainCart;

    const BenchmarkResult result = run_benchmark(datasets, ufo_learner, rf_learner, "ufo",
                                                 "reference-rf", folds, repeats, seed, workers);
    {
      std::ofstream out(out_metrics_csv, std::ios::binary);
      if (!out) throw IoError("cannot write file: " + std::string(out_metrics_csv));
      out << "dataset,method,brier,auc,acc,failed,error\n";
      for (const BenchmarkRow& row : result.rows) {
        out << row.dataset << ',' << row.method << ',' << format_double(row.brier) << ','
            << format_double(row.auc) << ',' << format_double(row.acc) << ','
            << (row.failed ? 1 : 0) << ',' << '"' << row.error << '"' << '\n';
      }
    }
    {
      std::ofstream out(out_summary_csv, std::ios::binary);
      if (!out) throw IoError("cannot write file: " + std::string(out_summary_csv));
      out << "metric,better,equal,worse,n_effective,p_value\n";
      for (const BenchmarkSummaryRow& row : result.summary) {
        out << row.metric << ',' << row.better << ',' << row.equal << ',' << row.worse << ','
            << row.n_effective << ',' << format_double(row.p_value) << '\n';
      }
    }
  });
}

ufo_status ufo_simulate_run(const char* config_json, const char* out_csv,
                            const char* out_summary_csv) {
  if (config_json == nullptr || out_csv == nullptr) {
    return fail(UFO_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("invalid simulate config: ") + e.what());
    }
    DgpSpec spec;
    const int dgp = j.value("dgp", 1);
    if (dgp == 1) {
      spec.family = DgpFamily::Dgp1;
    } else if (dgp == 2) {
      spec.family = DgpFamily::Dgp2;
    } else {
      throw ValidationError("dgp must be 1 or 2");
    }
    std::vector<size_t> n_grid = {100, 1000};
    if (j.contains("n_grid")) n_grid = j.at("n_grid").get<std::vector<size_t>>();
    const int replicates = j.value("replicates", 100);
    const uint64_t seed = j.value("seed", uint64_t{1});
    const int workers = j.value("workers", 0);
    std::vector<VimMethod> methods = {VimMethod::Unity, VimMethod::PermutationBaseline};
    if (j.contains("methods")) {
      methods.clear();
      for (const auto& mj : j.at("methods")) {
        const std::string name = mj.get<std::string>();
        if (name == "unity") {
          methods.push_back(VimMethod::Unity);
        } else if (name == "perm") {
          methods.push_back(VimMethod::PermutationBaseline);
        } else {
          throw ValidationError("unknown method '" + name + "'");
        }
      }
    }
    ufo_params p;
    ufo_params_init(&p);
    if (j.contains("params")) p = params_from_json(j.at("params"));
    Hyperparams hp = params_to_hyperparams(p, 10000, Task::Classification);
    if (p.prop_var <= 0) hp.prop_var = 0.0;
    if (p.mtry <= 0) hp.mtry = 0;

    const VimAucEvaluation eval =
        vim_auc_evaluation(spec, n_grid, replicates, methods, hp, seed, workers);
    write_sim_rows_csv(eval.rows, out_csv);
    if (out_summary_csv != nullptr) {
      std::ofstream out(out_summary_csv, std::ios::binary);
      if (!out) throw IoError("cannot write file: " + std::string(out_summary_csv));
      out << "covariate_type,n,method,mean_auc,ci_low,ci_high,median_rank,rank_q1,rank_q3\n";
      for (const VimAucCell& cell : eval.summary) {
        out << cell.covariate_type << ',' << cell.n << ',' << vim_method_name(cell.method) << ','
            << format_double(cell.mean_auc) << ',' << format_double(cell.ci_low) << ','
            << format_double(cell.ci_high) << ',' << format_double(cell.median_rank) << ','
            << format_double(cell.rank_q1) << ',' << format_double(cell.rank_q3) << '\n';
      }
    }
  });
}

} // extern "C"
