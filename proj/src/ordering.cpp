#include "unityforest/ordering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace unityforest {

bool CategoryOrdering::is_identity() const {
  for (size_t i = 0; i < rank_of_category.size(); ++i) {
    if (rank_of_category[i] != static_cast<int>(i + 1)) return false;
  }
  return true;
}

namespace {

// Leading principal-coordinate scores of the J x K class-proportion table.
// Small fixed-iteration power method on the K x K scatter matrix; the start
// vector and sign convention are fixed so the result is deterministic.
std::vector<double> principal_scores(const std::vector<std::vector<double>>& table) {
  const size_t rows = table.size();
  const size_t cols = rows == 0 ? 0 : table[0].size();
  std::vector<double> mean(cols, 0.0);
  for (const auto& row : table) {
    for (size_t k = 0; k < cols; ++k) mean[k] += row[k];
  }
  for (size_t k = 0; k < cols; ++k) mean[k] /= static_cast<double>(rows);

  std::vector<std::vector<double>> centered(rows, std::vector<double>(cols));
  for (size_t r = 0; r < rows; ++r) {
    for (size_t k = 0; k < cols; ++k) centered[r][k] = table[r][k] - mean[k];
  }
  std::vector<std::vector<double>> scatter(cols, std::vector<double>(cols, 0.0));
  for (size_t r = 0; r < rows; ++r) {
    for (size_t a = 0; a < cols; ++a) {
      for (size_t b = 0; b < cols; ++b) scatter[a][b] += centered[r][a] * centered[r][b];
    }
  }
  std::vector<double> v(cols, 1.0 / std::sqrt(static_cast<double>(cols)));
  std::vector<double> w(cols);
  for (int iter = 0; iter < 200; ++iter) {
    for (size_t a = 0; a < cols; ++a) {
      w[a] = std::inner_product(scatter[a].begin(), scatter[a].end(), v.begin(), 0.0);
    }
    const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
    if (norm < 1e-300) break;  // no variation between categories
    for (size_t a = 0; a < cols; ++a) v[a] = w[a] / norm;
  }
  size_t pivot = 0;
  for (size_t a = 1; a < cols; ++a) {
    if (std::fabs(v[a]) > std::fabs(v[pivot])) pivot = a;
  }
  if (v[pivot] < 0.0) {
    for (auto& x : v) x = -x;
  }
  std::vector<double> scores(rows);
  for (size_t r = 0; r < rows; ++r) {
    scores[r] = std::inner_product(centered[r].begin(), centered[r].end(), v.begin(), 0.0);
  }
  return scores;
}

} // namespace

CategoryOrdering order_categories(size_t covariate, const std::vector<double>& column,
                                  int num_categories, const std::vector<int32_t>& labels,
                                  int num_classes, const std::vector<double>& y, Task task) {
  if (num_categories < 1) throw InvalidArgument("order_categories: J must be >= 1");
  const size_t J = static_cast<size_t>(num_categories);

  std::vector<size_t> count(J, 0);
  std::vector<double> sum(J, 0.0);
  std::vector<std::vector<double>> class_count;
  if (task == Task::Classification) {
    class_count.assign(J, std::vector<double>(static_cast<size_t>(num_classes), 0.0));
  }
  for (size_t i = 0; i < column.size(); ++i) {
    const int c = static_cast<int>(column[i]);
    if (c < 1 || c > num_categories) {
      throw InvalidArgument("order_categories: value outside 1..J");
    }
    const size_t idx = static_cast<size_t>(c - 1);
    ++count[idx];
    if (task == Task::Classification) {
      class_count[idx][static_cast<size_t>(labels[i] - 1)] += 1.0;
    } else {
      sum[idx] += y[i];
    }
  }

  std::vector<double> score(J, 0.0);
  if (task == Task::Regression) {
    for (size_t c = 0; c < J; ++c) {
      if (count[c] > 0) score[c] = sum[c] / static_cast<double>(count[c]);
    }
  } else if (num_classes == 2) {
    for (size_t c = 0; c < J; ++c) {
      if (count[c] > 0) score[c] = class_count[c][1] / static_cast<double>(count[c]);
    }
  } else {
    std::vector<std::vector<double>> props;
    std::vector<size_t> present;
    for (size_t c = 0; c < J; ++c) {
      if (count[c] == 0) continue;
      std::vector<double> row(class_count[c]);
      for (auto& v : row) v /= static_cast<double>(count[c]);
      props.push_back(std::move(row));
      present.push_back(c);
    }
    if (!present.empty()) {
      const std::vector<double> pc = principal_scores(props);
      for (size_t k = 0; k < present.size(); ++k) score[present[k]] = pc[k];
    }
  }

  std::vector<size_t> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const bool ea = count[a] == 0;
    const bool eb = count[b] == 0;
    if (ea != eb) return eb;  // empty categories last
    if (ea) return a < b;     // ... in raw-code order
    if (score[a] != score[b]) return score[a] < score[b];
    return a < b;
  });

  CategoryOrdering result;
  result.covariate = covariate;
  result.rank_of_category.resize(J);
  for (size_t rank = 0; rank < J; ++rank) {
    result.rank_of_category[order[rank]] = static_cast<int>(rank + 1);
  }
  return result;
}

} // namespace unityforest
