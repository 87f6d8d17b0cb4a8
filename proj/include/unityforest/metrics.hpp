#pragma once

#include <cstdint>
#include <vector>

#include "unityforest/common.hpp"

namespace unityforest {

// Multiclass Brier score, summed over classes: mean_i sum_k (p_ik - [y_i=k])^2.
// Range [0, 2] for two classes.
double brier(const std::vector<std::vector<double>>& probabilities,
             const std::vector<int32_t>& labels);

// Mann-Whitney AUC with ties counted 1/2; positive class is 2.
double auc(const std::vector<double>& scores, const std::vector<int32_t>& binary_labels);

// AUC of scores separating index set `positives` from `negatives`.
double auc_groups(const std::vector<double>& scores, const std::vector<size_t>& positives,
                  const std::vector<size_t>& negatives);

double accuracy(const std::vector<int32_t>& predicted, const std::vector<int32_t>& labels);

// Exact two-sided binomial test at null probability 0.5: the sum of all
// outcome probabilities not exceeding the observed one.
double binomial_sign_test(int64_t wins, int64_t losses);

} // namespace unityforest
