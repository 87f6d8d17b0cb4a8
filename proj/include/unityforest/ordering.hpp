#pragma once

#include <cstdint>
#include <vector>

#include "unityforest/common.hpp"

namespace unityforest {

// Maps raw category codes 1..J of one nominal covariate to ordered ranks
// 1..J so the covariate can be split like an ordered one.
struct CategoryOrdering {
  size_t covariate = 0;
  std::vector<int> rank_of_category;  // rank_of_category[c-1] = rank of raw code c

  int rank(int category) const { return rank_of_category[static_cast<size_t>(category - 1)]; }
  bool is_identity() const;
};

// Categories are ordered ascending by outcome tendency: proportion of class 2
// for binary classification, first principal coordinate of the per-category
// class distribution table for K > 2, per-category mean for regression.
// Ties break by raw category code; categories absent from the data go last.
CategoryOrdering order_categories(size_t covariate, const std::vector<double>& column,
                                  int num_categories, const std::vector<int32_t>& labels,
                                  int num_classes, const std::vector<double>& y, Task task);

} // namespace unityforest
