/* C API of the unityforest library: opaque handles, status codes, and a
 * thread-local last-error message. All functions return UFO_OK on success;
 * on failure the handle outputs are left untouched and ufo_last_error()
 * describes the problem. */

#ifndef UNITYFOREST_C_H
#define UNITYFOREST_C_H

#include <stdint.h>

#if defined(_WIN32)
#define UFO_API __declspec(dllexport)
#else
#define UFO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ufo_status {
  UFO_OK = 0,
  UFO_E_INVALID_ARGUMENT = 1,
  UFO_E_VALIDATION = 2,
  UFO_E_IO = 3,
  UFO_E_INTERNAL = 4
} ufo_status;

typedef struct ufo_dataset ufo_dataset;
typedef struct ufo_model ufo_model;

UFO_API const char* ufo_version(void);

/* Message for the most recent failing call on this thread. */
UFO_API const char* ufo_last_error(void);

/* schema_json declares the outcome column, task, and column kinds:
 * {"task":"classification","outcome":"y","classes":2,"nominal":{"x3":2}}
 * A nominal entry of 0 recodes the observed values to contiguous 1..J. */
UFO_API ufo_status ufo_dataset_open_csv(const char* csv_path, const char* schema_json,
                                        ufo_dataset** out);
UFO_API void ufo_dataset_close(ufo_dataset* ds);
UFO_API ufo_status ufo_dataset_dims(const ufo_dataset* ds, int64_t* n, int64_t* p);

/* Hyperparameters; negative values mean "use the default for this dataset". */
typedef struct ufo_params {
  double fract_n;
  double prop_var;
  int64_t n_cand_trees;
  int64_t max_depth_root;
  int64_t mtry;
  double prop_best_splits;
  int64_t num_trees;
  int64_t min_node_size;
  uint64_t seed;
  int64_t workers;        /* 0 = all hardware threads */
  int32_t plain_cart;     /* nonzero trains the conventional reference forest */
} ufo_params;

UFO_API void ufo_params_init(ufo_params* params);

UFO_API ufo_status ufo_train(const ufo_dataset* ds, const ufo_params* params, ufo_model** out);
UFO_API ufo_status ufo_model_save(const ufo_model* model, const char* path);
UFO_API ufo_status ufo_model_load(const char* path, ufo_model** out);
UFO_API void ufo_model_close(ufo_model* model);

/* Short JSON description (task, tree count, covariates). Free with
 * ufo_string_free. */
UFO_API ufo_status ufo_model_info_json(const ufo_model* model, char** out_json);
UFO_API void ufo_string_free(char* s);

/* Out-of-bag ensemble error on the training data: misclassification rate
 * for classification, RMSE for regression. */
UFO_API ufo_status ufo_oob_error(const ufo_model* model, const ufo_dataset* ds, double* out);

/* Batch prediction: reads the model's covariate columns from data_csv and
 * writes prediction (and per-class probabilities) rows to out_csv. */
UFO_API ufo_status ufo_predict_csv(const ufo_model* model, const char* data_csv,
                                   const char* out_csv, int64_t workers);

/* Unity VIM report sorted by VIM descending: covariate, unity_vim, rank,
 * n_selected_splits; with_baseline adds a permutation-importance column
 * computed on the same forest. */
UFO_API ufo_status ufo_vim_csv(const ufo_model* model, const ufo_dataset* ds, uint64_t perm_seed,
                               int32_t with_baseline, const char* out_csv, int64_t workers);

/* Covariate-representative tree roots. covariates_csv may list covariate
 * names (comma-separated); when NULL the top_k covariates by unity VIM are
 * used. Writes crtr_<name>.json and crtr_<name>.dot per covariate into
 * out_dir plus an index file crtr_index.json. */
UFO_API ufo_status ufo_crtr_export(const ufo_model* model, const ufo_dataset* ds,
                                   const char* covariates_csv, int64_t top_k, uint64_t perm_seed,
                                   const char* out_dir, int64_t workers);

/* Benchmark of the unity forest against the matched conventional forest.
 * config_json:
 * {"datasets":[{"name":"a","csv":"a.csv","schema":"a.schema.json"},...],
 *  "folds":5,"repeats":5,"seed":1,"workers":0,
 *  "params":{...optional ufo_params-style overrides...}}
 * Writes per-dataset mean metrics and a sign-test summary. */
UFO_API ufo_status ufo_benchmark_run(const char* config_json, const char* out_metrics_csv,
                                     const char* out_summary_csv);

/* Simulation study harness. config_json:
 * {"dgp":1,"n_grid":[100,1000],"replicates":100,"methods":["unity","perm"],
 *  "seed":1,"workers":0,"params":{...overrides...}}
 * Writes one row per (replicate, n, method, covariate type) to out_csv and,
 * when out_summary_csv is non-NULL, aggregated AUC/rank cells. */
UFO_API ufo_status ufo_simulate_run(const char* config_json, const char* out_csv,
                                    const char* out_summary_csv);

#ifdef __cplusplus
}
#endif

#endif /* UNITYFOREST_C_H */
