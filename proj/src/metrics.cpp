#include "unityforest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace unityforest {

double brier(const std::vector<std::vector<double>>& probabilities,
             const std::vector<int32_t>& labels) {
  if (probabilities.size() != labels.size()) {
    throw InvalidArgument("brier: probabilities and labels differ in length");
  }
  if (probabilities.empty()) throw InvalidArgument("brier: empty input");
  double sum = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    for (size_t k = 0; k < probabilities[i].size(); ++k) {
      const double truth = static_cast<int32_t>(k + 1) == labels[i] ? 1.0 : 0.0;
      const double d = probabilities[i][k] - truth;
      sum += d * d;
    }
  }
  return sum / static_cast<double>(labels.size());
}

double auc(const std::vector<double>& scores, const std::vector<int32_t>& binary_labels) {
  if (scores.size() != binary_labels.size()) {
    throw InvalidArgument("auc: scores and labels differ in length");
  }
  std::vector<size_t> positives, negatives;
  for (size_t i = 0; i < binary_labels.size(); ++i) {
    (binary_labels[i] == 2 ? positives : negatives).push_back(i);
  }
  return auc_groups(scores, positives, negatives);
}

double auc_groups(const std::vector<double>& scores, const std::vector<size_t>& positives,
                  const std::vector<size_t>& negatives) {
  if (positives.empty() || negatives.empty()) {
    throw InvalidArgument("auc: both groups must be nonempty");
  }
  // Rank-sum form with average ranks for ties.
  std::vector<std::pair<double, bool>> items;
  items.reserve(positives.size() + negatives.size());
  for (const size_t i : positives) items.emplace_back(scores[i], true);
  for (const size_t i : negatives) items.emplace_back(scores[i], false);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < items.size()) {
    size_t j = i;
    while (j < items.size() && items[j].first == items[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (size_t k = i; k < j; ++k) {
      if (items[k].second) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double n_pos = static_cast<double>(positives.size());
  const double n_neg = static_cast<double>(negatives.size());
  const double u = rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0;
  return u / (n_pos * n_neg);
}

double accuracy(const std::vector<int32_t>& predicted, const std::vector<int32_t>& labels) {
  if (predicted.size() != labels.size()) {
    throw InvalidArgument("accuracy: predicted and labels differ in length");
  }
  if (predicted.empty()) throw InvalidArgument("accuracy: empty input");
  size_t correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double binomial_sign_test(int64_t wins, int64_t losses) {
  if (wins < 0 || losses < 0 || wins + losses < 1) {
    throw InvalidArgument("binomial_sign_test: need wins + losses >= 1");
  }
  const int64_t n = wins + losses;
  // log C(n, k) - n log 2, evaluated via lgamma.
  auto log_prob = [n](int64_t k) {
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1)) -
           static_cast<double>(n) * std::log(2.0);
  };
  const double observed = log_prob(wins);
  double p = 0.0;
  for (int64_t k = 0; k <= n; ++k) {
    if (log_prob(k) <= observed + 1e-10) p += std::exp(log_prob(k));
  }
  return std::min(p, 1.0);
}

} // namespace unityforest
