// unityforest command line: train, predict, vim, crtr, benchmark, simulate.
// The tool is a thin wrapper over the C API in unityforest_c.h.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unityforest_c.h"

namespace {

struct HyperFlags {
  double fract_n = -1.0;
  double prop_var = -1.0;
  int64_t n_cand_trees = -1;
  int64_t max_depth_root = -1;
  int64_t mtry = -1;
  double prop_best_splits = -1.0;
  int64_t num_trees = -1;
  int64_t min_node_size = -1;
  uint64_t seed = 1;
  int64_t workers = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--num-trees", num_trees, "Number of trees");
    cmd->add_option("--n-cand-trees", n_cand_trees, "Candidate tree roots per tree");
    cmd->add_option("--max-depth-root", max_depth_root, "Tree root depth");
    cmd->add_option("--prop-var", prop_var, "Covariate fraction per tree root");
    cmd->add_option("--fract-n", fract_n, "Tree sample fraction");
    cmd->add_option("--mtry", mtry, "Covariates tried per CART split");
    cmd->add_option("--prop-best-splits", prop_best_splits, "Top split fraction");
    cmd->add_option("--min-node-size", min_node_size, "Minimum node size for splitting");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--workers", workers, "Worker threads (0 = all cores)");
  }

  ufo_params params() const {
    ufo_params p;
    ufo_params_init(&p);
    p.fract_n = fract_n;
    p.prop_var = prop_var;
    p.n_cand_trees = n_cand_trees;
    p.max_depth_root = max_depth_root;
    p.mtry = mtry;
    p.prop_best_splits = prop_best_splits;
    p.num_trees = num_trees;
    p.min_node_size = min_node_size;
    p.seed = seed;
    p.workers = workers;
    return p;
  }

  nlohmann::json params_json() const {
    nlohmann::json j;
    if (fract_n > 0) j["fract_n"] = fract_n;
    if (prop_var > 0) j["prop_var"] = prop_var;
    if (n_cand_trees > 0) j["n_cand_trees"] = n_cand_trees;
    if (max_depth_root > 0) j["max_depth_root"] = max_depth_root;
    if (mtry > 0) j["mtry"] = mtry;
    if (prop_best_splits > 0) j["prop_best_splits"] = prop_best_splits;
    if (num_trees > 0) j["num_trees"] = num_trees;
    if (min_node_size > 0) j["min_node_size"] = min_node_size;
    return j;
  }
};

struct SchemaFlags {
  std::string schema_path;
  std::string task = "classification";
  std::string outcome;
  int classes = 0;
  std::vector<std::string> nominal;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--schema", schema_path, "Schema JSON file declaring column kinds");
    cmd->add_option("--task", task, "classification or regression (without --schema)");
    cmd->add_option("--outcome", outcome, "Outcome column name (without --schema)");
    cmd->add_option("--classes", classes, "Declared class count (0 = infer)");
    cmd->add_option("--nominal", nominal,
                    "Nominal columns, 'name' or 'name:J' (without --schema)");
  }

  std::string schema_json() const {
    if (!schema_path.empty()) {
      std::ifstream in(schema_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open schema file: " + schema_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
    if (outcome.empty()) {
      throw std::runtime_error("either --schema or --outcome must be given");
    }
    nlohmann::json j;
    j["task"] = task;
    j["outcome"] = outcome;
    if (classes > 0) j["classes"] = classes;
    nlohmann::json nom = nlohmann::json::object();
    for (const std::string& item : nominal) {
      const size_t colon = item.find(':');
      if (colon == std::string::npos) {
        nom[item] = 0;
      } else {
        nom[item.substr(0, colon)] = std::stoi(item.substr(colon + 1));
      }
    }
    j["nominal"] = nom;
    return j.dump();
  }
};

int check(ufo_status status, const char* what) {
  if (status == UFO_OK) return 0;
  std::cerr << "error: " << what << ": " << ufo_last_error() << "\n";
  return status == UFO_E_IO ? 3 : (status == UFO_E_VALIDATION ? 2 : 1);
}

struct DatasetHandle {
  ufo_dataset* ptr = nullptr;
  ~DatasetHandle() { ufo_dataset_close(ptr); }
};

struct ModelHandle {
  ufo_model* ptr = nullptr;
  ~ModelHandle() { ufo_model_close(ptr); }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"unity forests: jointly optimized tree roots, unity VIM, and "
               "covariate-representative tree roots"};
  app.require_subcommand(1);

  std::string data_path, model_path, out_path, out_dir;
  HyperFlags hyper;
  SchemaFlags schema;

  // Flags beat config-file values, which beat defaults.
  auto add_config = [](CLI::App* cmd) {
    cmd->set_config("--config", "", "Config file (key=value format)");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a forest and save the model");
  add_config(train_cmd);
  train_cmd->add_option("--data", data_path, "Training CSV")->required();
  schema.add_to(train_cmd);
  train_cmd->add_option("--out", out_path, "Model output path")->required();
  bool plain_cart = false;
  train_cmd->add_flag("--reference-rf", plain_cart,
                      "Train the conventional CART reference forest instead");
  hyper.add_to(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Batch prediction to CSV");
  add_config(predict_cmd);
  predict_cmd->add_option("--model", model_path, "Model file")->required();
  predict_cmd->add_option("--data", data_path, "Covariate CSV")->required();
  predict_cmd->add_option("--out", out_path, "Prediction CSV")->required();
  predict_cmd->add_option("--workers", hyper.workers, "Worker threads");

  // vim
  auto* vim_cmd = app.add_subcommand("vim", "Unity variable importance report");
  add_config(vim_cmd);
  vim_cmd->add_option("--model", model_path, "Model file")->required();
  vim_cmd->add_option("--data", data_path, "Training CSV")->required();
  schema.add_to(vim_cmd);
  vim_cmd->add_option("--out", out_path, "VIM CSV output")->required();
  bool with_baseline = false;
  vim_cmd->add_flag("--baseline", with_baseline, "Add a permutation-importance column");
  vim_cmd->add_option("--seed", hyper.seed, "Permutation seed");
  vim_cmd->add_option("--workers", hyper.workers, "Worker threads");

  // crtr
  auto* crtr_cmd = app.add_subcommand("crtr", "Covariate-representative tree roots");
  add_config(crtr_cmd);
  crtr_cmd->add_option("--model", model_path, "Model file")->required();
  crtr_cmd->add_option("--data", data_path, "Training CSV")->required();
  schema.add_to(crtr_cmd);
  crtr_cmd->add_option("--out", out_dir, "Output directory")->required();
  int64_t top_k = 5;
  std::string covariates;
  crtr_cmd->add_option("--top-k", top_k, "Export CRTRs for the top-k covariates by unity VIM");
  crtr_cmd->add_option("--covariates", covariates, "Explicit comma-separated covariate names");
  crtr_cmd->add_option("--seed", hyper.seed, "Permutation seed for the VIM ranking");
  crtr_cmd->add_option("--workers", hyper.workers, "Worker threads");

  // benchmark
  auto* bench_cmd = app.add_subcommand("benchmark",
                                       "Compare unity forest and reference RF over datasets");
  add_config(bench_cmd);
  std::vector<std::string> bench_datasets;
  int folds = 5, repeats = 5;
  bench_cmd
      ->add_option("--datasets", bench_datasets,
                   "Datasets as data.csv:schema.json (repeatable or comma-separated)")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--out", out_dir, "Output directory")->required();
  bench_cmd->add_option("--folds", folds, "CV folds");
  bench_cmd->add_option("--repeats", repeats, "CV repetitions");
  hyper.add_to(bench_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "VIM simulation study on synthetic data");
  add_config(sim_cmd);
  int dgp = 1;
  std::vector<size_t> n_grid = {100, 1000};
  int replicates = 100;
  std::vector<std::string> methods = {"unity", "perm"};
  sim_cmd->add_option("--dgp", dgp, "Data-generating process (1 or 2)");
  sim_cmd->add_option("--n-grid", n_grid, "Sample sizes")->delimiter(',');
  sim_cmd->add_option("--replicates", replicates, "Replicates per sample size");
  sim_cmd->add_option("--methods", methods, "VIM methods: unity, perm")->delimiter(',');
  sim_cmd->add_option("--out", out_path, "Tidy results CSV")->required();
  std::string summary_path;
  sim_cmd->add_option("--summary", summary_path, "Aggregated summary CSV");
  hyper.add_to(sim_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      DatasetHandle ds;
      if (int rc = check(ufo_dataset_open_csv(data_path.c_str(), schema.schema_json().c_str(),
                                              &ds.ptr),
                         "loading data"))
        return rc;
      int64_t n = 0, p = 0;
      ufo_dataset_dims(ds.ptr, &n, &p);
      std::cout << "data: " << n << " observations, " << p << " covariates\n";
      ufo_params params = hyper.params();
      params.plain_cart = plain_cart ? 1 : 0;
      const auto t0 = std::chrono::steady_clock::now();
      ModelHandle model;
      if (int rc = check(ufo_train(ds.ptr, &params, &model.ptr), "training")) return rc;
      const auto t1 = std::chrono::steady_clock::now();
      const double seconds = std::chrono::duration<double>(t1 - t0).count();
      char* info = nullptr;
      ufo_model_info_json(model.ptr, &info);
      nlohmann::json ij = nlohmann::json::parse(info);
      ufo_string_free(info);
      const int64_t num_trees = ij["num_trees"].get<int64_t>();
      std::printf("trained %lld trees in %.2f s (%.2f ms/tree)\n",
                  static_cast<long long>(num_trees), seconds,
                  1000.0 * seconds / static_cast<double>(num_trees));
      double oob = 0.0;
      if (int rc = check(ufo_oob_error(model.ptr, ds.ptr, &oob), "oob error")) return rc;
      std::printf("oob error: %.6f\n", oob);
      if (int rc = check(ufo_model_save(model.ptr, out_path.c_str()), "saving model")) return rc;
      std::cout << "model written to " << out_path << "\n";
    } else if (predict_cmd->parsed()) {
      ModelHandle model;
      if (int rc = check(ufo_model_load(model_path.c_str(), &model.ptr), "loading model"))
        return rc;
      if (int rc = check(ufo_predict_csv(model.ptr, data_path.c_str(), out_path.c_str(),
                                         hyper.workers),
                         "prediction"))
        return rc;
      std::cout << "predictions written to " << out_path << "\n";
    } else if (vim_cmd->parsed()) {
      ModelHandle model;
      if (int rc = check(ufo_model_load(model_path.c_str(), &model.ptr), "loading model"))
        return rc;
      DatasetHandle ds;
      if (int rc = check(ufo_dataset_open_csv(data_path.c_str(), schema.schema_json().c_str(),
                                              &ds.ptr),
                         "loading data"))
        return rc;
      if (int rc = check(ufo_vim_csv(model.ptr, ds.ptr, hyper.seed, with_baseline ? 1 : 0,
                                     out_path.c_str(), hyper.workers),
                         "vim"))
        return rc;
      std::cout << "vim report written to " << out_path << "\n";
    } else if (crtr_cmd->parsed()) {
      ModelHandle model;
      if (int rc = check(ufo_model_load(model_path.c_str(), &model.ptr), "loading model"))
        return rc;
      DatasetHandle ds;
      if (int rc = check(ufo_dataset_open_csv(data_path.c_str(), schema.schema_json().c_str(),
                                              &ds.ptr),
                         "loading data"))
        return rc;
      if (int rc = check(ufo_crtr_export(model.ptr, ds.ptr,
                                         covariates.empty() ? nullptr : covariates.c_str(), top_k,
                                         hyper.seed, out_dir.c_str(), hyper.workers),
                         "crtr"))
        return rc;
      std::ifstream index(out_dir + "/crtr_index.json");
      std::ostringstream ss;
      ss << index.rdbuf();
      for (const auto& entry : nlohmann::json::parse(ss.str())) {
        const std::string name = entry["covariate"].get<std::string>();
        if (entry["available"].get<bool>()) {
          std::cout << "crtr for " << name << ": tree " << entry["tree_id"].get<int64_t>()
                    << ", files crtr_" << name << ".{json,dot}\n";
        } else {
          std::cout << "crtr for " << name << ": no CRTR available\n";
        }
      }
    } else if (bench_cmd->parsed()) {
      nlohmann::json config;
      nlohmann::json datasets = nlohmann::json::array();
      for (const std::string& spec : bench_datasets) {
        const size_t colon = spec.find(':');
        if (colon == std::string::npos) {
          std::cerr << "error: dataset spec must be data.csv:schema.json\n";
          return 1;
        }
        nlohmann::json dj;
        dj["csv"] = spec.substr(0, colon);
        dj["schema"] = spec.substr(colon + 1);
        dj["name"] = spec.substr(0, colon);
        datasets.push_back(dj);
      }
      config["datasets"] = datasets;
      config["folds"] = folds;
      config["repeats"] = repeats;
      config["seed"] = hyper.seed;
      config["workers"] = hyper.workers;
      config["params"] = hyper.params_json();
      std::filesystem::create_directories(out_dir);
      const std::string metrics_path = out_dir + "/benchmark_metrics.csv";
      const std::string summary = out_dir + "/benchmark_summary.csv";
      if (int rc = check(ufo_benchmark_run(config.dump().c_str(), metrics_path.c_str(),
                                           summary.c_str()),
                         "benchmark"))
        return rc;
      std::ifstream in(summary);
      std::cout << in.rdbuf();
      std::cout << "details in " << metrics_path << "\n";
    } else if (sim_cmd->parsed()) {
      nlohmann::json config;
      config["dgp"] = dgp;
      config["n_grid"] = n_grid;
      config["replicates"] = replicates;
      config["methods"] = methods;
      config["seed"] = hyper.seed;
      config["workers"] = hyper.workers;
      config["params"] = hyper.params_json();
      if (int rc = check(ufo_simulate_run(config.dump().c_str(), out_path.c_str(),
                                          summary_path.empty() ? nullptr : summary_path.c_str()),
                         "simulate"))
        return rc;
      std::cout << "simulation results written to " << out_path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
