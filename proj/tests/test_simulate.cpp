#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "unityforest/metrics.hpp"
#include "unityforest/simulate.hpp"

using namespace unityforest;

namespace {

double mean_where(const std::vector<double>& values, const std::vector<bool>& mask) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    if (mask[i]) {
      sum += values[i];
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

} // namespace

TEST_CASE("dgp1 shape and class balance") {
  const size_t n = 10000;
  const Dataset ds = generate_dgp1(n, 42);
  CHECK(ds.p == 68);
  CHECK(ds.n == n);
  CHECK(ds.covariates[12].name == "ql_s_1");
  CHECK(ds.covariates[18].name == "no_1");
  size_t n2 = 0;
  for (const int32_t lab : ds.labels) {
    if (lab == 2) ++n2;
  }
  const double bound = 3.0 * std::sqrt(static_cast<double>(n) / 4.0);
  CHECK(std::abs(static_cast<double>(n2) - n / 2.0) <= bound);
}

TEST_CASE("dgp1 generation is seed-deterministic") {
  const Dataset a = generate_dgp1(200, 7);
  const Dataset b = generate_dgp1(200, 7);
  CHECK(a.columns == b.columns);
  CHECK(a.labels == b.labels);
  const Dataset c = generate_dgp1(200, 8);
  CHECK(a.columns != c.columns);
}

TEST_CASE("dgp1 marginal-strong covariate shifts by delta_s") {
  const size_t n = 10000;
  const EffectStrengths delta;
  const Dataset ds = generate_dgp1(n, 3);
  std::vector<bool> class2(n);
  for (size_t i = 0; i < n; ++i) class2[i] = ds.labels[i] == 2;
  std::vector<bool> class1(n);
  for (size_t i = 0; i < n; ++i) class1[i] = !class2[i];
  const double diff = mean_where(ds.columns[0], class2) - mean_where(ds.columns[0], class1);
  CHECK(std::abs(diff - delta.strong) < 0.2);
}

TEST_CASE("dgp1 qualitative pair has no marginal shift but a stratified one") {
  const size_t n = 10000;
  const EffectStrengths delta;
  const Dataset ds = generate_dgp1(n, 11);
  const auto& member = ds.columns[12];   // ql_s_1
  const auto& partner = ds.columns[13];  // ql_s_2
  std::vector<bool> c2(n), c1(n);
  for (size_t i = 0; i < n; ++i) {
    c2[i] = ds.labels[i] == 2;
    c1[i] = !c2[i];
  }
  CHECK(std::abs(mean_where(member, c2) - mean_where(member, c1)) < 0.1);
  CHECK(std::abs(mean_where(partner, c2) - mean_where(partner, c1)) < 0.1);

  std::vector<bool> c2_pos(n), c1_pos(n), c2_neg(n), c1_neg(n);
  for (size_t i = 0; i < n; ++i) {
    const bool pos = partner[i] > 0.0;
    c2_pos[i] = c2[i] && pos;
    c1_pos[i] = c1[i] && pos;
    c2_neg[i] = c2[i] && !pos;
    c1_neg[i] = c1[i] && !pos;
  }
  const double diff_pos = mean_where(member, c2_pos) - mean_where(member, c1_pos);
  const double diff_neg = mean_where(member, c2_neg) - mean_where(member, c1_neg);
  CHECK(std::abs(diff_pos - delta.strong) < 0.15);
  CHECK(std::abs(diff_neg + delta.strong) < 0.15);
}

TEST_CASE("dgp2 schema declares the categorical covariates") {
  const Dataset ds = generate_dgp2(500, 9);
  CHECK(ds.p == 69);
  CHECK(ds.covariates[3].name == "bne_ql");
  CHECK(ds.covariates[3].kind == CovariateKind::Nominal);
  CHECK(ds.covariates[3].num_categories == 2);
  CHECK(ds.covariates[7].num_categories == 2);
  CHECK(ds.covariates[11].num_categories == 2);
  CHECK(ds.covariates[15].name == "cne_ql");
  CHECK(ds.covariates[15].num_categories == 3);
  CHECK(ds.covariates[19].name == "no_1");
  for (size_t i = 0; i < ds.n; ++i) {
    CHECK(ds.columns[15][i] >= 1);
    CHECK(ds.columns[15][i] <= 3);
  }
}

TEST_CASE("dgp2 binary no-marginal partner has balanced classes per level") {
  const size_t n = 10000;
  const Dataset ds = generate_dgp2(n, 21);
  for (const int level : {1, 2}) {
    size_t total = 0, class2 = 0;
    for (size_t i = 0; i < n; ++i) {
      if (static_cast<int>(ds.columns[3][i]) == level) {
        ++total;
        if (ds.labels[i] == 2) ++class2;
      }
    }
    const double prop = static_cast<double>(class2) / static_cast<double>(total);
    CHECK(std::abs(prop - 0.5) < 0.05);
  }
}

TEST_CASE("dgp2 quantitative effect exists only where the partner is level 1") {
  const size_t n = 10000;
  const Dataset ds = generate_dgp2(n, 33);
  // Stratified AUC of qn_bne_s against the outcome.
  for (const int level : {1, 2}) {
    std::vector<double> scores;
    std::vector<int32_t> labels;
    for (size_t i = 0; i < n; ++i) {
      if (static_cast<int>(ds.columns[11][i]) == level) {
        scores.push_back(ds.columns[12][i]);
        labels.push_back(ds.labels[i]);
      }
    }
    const double stratum_auc = auc(scores, labels);
    if (level == 1) {
      CHECK(stratum_auc > 0.6);
    } else {
      CHECK(stratum_auc < 0.55);
    }
  }
}

TEST_CASE("dgp2 marginal binary covariate shifts with the class") {
  const size_t n = 10000;
  const Dataset ds = generate_dgp2(n, 13);
  size_t lvl2_c2 = 0, total_c2 = 0, lvl2_c1 = 0, total_c1 = 0;
  for (size_t i = 0; i < n; ++i) {
    if (ds.labels[i] == 2) {
      ++total_c2;
      if (static_cast<int>(ds.columns[7][i]) == 2) ++lvl2_c2;
    } else {
      ++total_c1;
      if (static_cast<int>(ds.columns[7][i]) == 2) ++lvl2_c1;
    }
  }
  CHECK(static_cast<double>(lvl2_c2) / total_c2 > 0.6);
  CHECK(static_cast<double>(lvl2_c1) / total_c1 < 0.4);
}

TEST_CASE("vim auc evaluation row bookkeeping and degenerate auc values") {
  DgpSpec spec;
  spec.family = DgpFamily::Dgp1;
  Hyperparams hp;
  hp.num_trees = 20;
  hp.n_cand_trees = 10;
  hp.prop_var = 0.0;
  hp.mtry = 0;
  const std::vector<VimMethod> methods = {VimMethod::Unity};
  const VimAucEvaluation eval = vim_auc_evaluation(spec, {120}, 2, methods, hp, 5, 2);
  CHECK(eval.rows.size() == 1 * 2 * 1 * spec.covariate_types().size());
  CHECK(eval.summary.size() == spec.covariate_types().size());
  for (const SimRow& row : eval.rows) {
    CHECK(row.auc >= 0.0);
    CHECK(row.auc <= 1.0);
  }

  // Degenerate AUCs directly from auc_groups.
  std::vector<double> tied(10, 1.0);
  std::vector<size_t> pos = {0, 1};
  std::vector<size_t> neg = {2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(auc_groups(tied, pos, neg) == 0.5);
  std::vector<double> separated = {9, 9, 1, 1, 1, 1, 1, 1, 1, 1};
  CHECK(auc_groups(separated, pos, neg) == 1.0);
}

TEST_CASE("sim rows csv is deterministic") {
  DgpSpec spec;
  spec.family = DgpFamily::Dgp2;
  Hyperparams hp;
  hp.num_trees = 10;
  hp.n_cand_trees = 5;
  hp.prop_var = 0.0;
  hp.mtry = 0;
  const auto a = vim_auc_evaluation(spec, {100}, 1, {VimMethod::Unity}, hp, 9, 2);
  const auto b = vim_auc_evaluation(spec, {100}, 1, {VimMethod::Unity}, hp, 9, 1);
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].auc == b.rows[k].auc);
    CHECK(a.rows[k].median_rank == b.rows[k].median_rank);
  }
}
