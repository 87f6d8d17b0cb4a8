#pragma once

#include <cstdint>

#include "unityforest/common.hpp"

namespace unityforest {

struct Hyperparams {
  double fract_n = 0.7;          // tree sample fraction, without replacement
  double prop_var = 0.0;         // covariate fraction per tree root
  int n_cand_trees = 500;        // candidate roots per tree
  int max_depth_root = 3;        // tree root depth bound
  int mtry = 0;                  // covariates tried per CART split
  double prop_best_splits = 0.01;
  int num_trees = 500;
  int min_node_size = 5;         // minimum node size for splitting
  uint64_t seed = 1;

  void validate(size_t p) const;
};

// Paper defaults as a pure function of the covariate count:
// prop_var = sqrt(p)/p for p <= 100 and 0.1 otherwise, mtry = floor(sqrt(p)).
Hyperparams default_hyperparams(size_t p, Task task);

// Fills the p-dependent fields (prop_var, mtry) with their defaults when they
// are unset (<= 0); other fields pass through.
Hyperparams resolve_hyperparams(Hyperparams hp, size_t p, Task task);

// ceil(prop_var * p), clamped to [1, p].
size_t root_subset_size(const Hyperparams& hp, size_t p);

} // namespace unityforest
