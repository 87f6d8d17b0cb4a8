#include "unityforest/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace unityforest {

void Hyperparams::validate(size_t p) const {
  auto fail = [](const std::string& msg) { throw InvalidArgument("hyperparams: " + msg); };
  if (!(fract_n > 0.0 && fract_n <= 1.0)) fail("fract_n must be in (0, 1]");
  if (!(prop_var > 0.0 && prop_var <= 1.0)) fail("prop_var must be in (0, 1]");
  if (n_cand_trees < 1) fail("n_cand_trees must be >= 1");
  if (max_depth_root < 1) fail("max_depth_root must be >= 1");
  if (mtry < 1 || static_cast<size_t>(mtry) > p) fail("mtry must be in [1, p]");
  if (!(prop_best_splits > 0.0 && prop_best_splits <= 1.0)) {
    fail("prop_best_splits must be in (0, 1]");
  }
  if (num_trees < 1) fail("num_trees must be >= 1");
  if (min_node_size < 1) fail("min_node_size must be >= 1");
}

Hyperparams default_hyperparams(size_t p, Task /*task*/) {
  if (p < 1) throw InvalidArgument("default_hyperparams: p must be >= 1");
  Hyperparams hp;
  const double sp = std::sqrt(static_cast<double>(p));
  hp.prop_var = p <= 100 ? sp / static_cast<double>(p) : 0.1;
  hp.mtry = std::max(1, static_cast<int>(std::floor(sp)));
  return hp;
}

Hyperparams resolve_hyperparams(Hyperparams hp, size_t p, Task task) {
  const Hyperparams defaults = default_hyperparams(p, task);
  if (hp.prop_var <= 0.0) hp.prop_var = defaults.prop_var;
  if (hp.mtry <= 0) hp.mtry = defaults.mtry;
  return hp;
}

size_t root_subset_size(const Hyperparams& hp, size_t p) {
  const double raw = hp.prop_var * static_cast<double>(p);
  size_t k = static_cast<size_t>(std::ceil(raw));
  return std::clamp<size_t>(k, 1, p);
}

} // namespace unityforest
