#include "unityforest/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "unityforest/importance.hpp"
#include "unityforest/rng.hpp"

namespace unityforest {

namespace {

CovariateInfo continuous_covariate(const std::string& name) {
  CovariateInfo info;
  info.name = name;
  info.kind = CovariateKind::Continuous;
  return info;
}

CovariateInfo nominal_covariate(const std::string& name, int categories) {
  CovariateInfo info;
  info.name = name;
  info.kind = CovariateKind::Nominal;
  info.num_categories = categories;
  info.category_values.resize(static_cast<size_t>(categories));
  for (int c = 0; c < categories; ++c) info.category_values[static_cast<size_t>(c)] = c + 1;
  return info;
}

Dataset empty_binary_dataset(size_t n) {
  Dataset ds;
  ds.n = n;
  ds.task = Task::Classification;
  ds.num_classes = 2;
  ds.outcome_name = "y";
  ds.labels.resize(n);
  return ds;
}

} // namespace

size_t DgpSpec::num_covariates() const { return family == DgpFamily::Dgp1 ? 68 : 69; }

std::vector<size_t> DgpSpec::noise_covariates() const {
  const size_t first = family == DgpFamily::Dgp1 ? 18 : 19;
  std::vector<size_t> out;
  for (size_t c = first; c < num_covariates(); ++c) out.push_back(c);
  return out;
}

std::vector<CovariateType> DgpSpec::covariate_types() const {
  if (family == DgpFamily::Dgp1) {
    return {
        {"mrg_s", {0, 1}},  {"mrg_m", {2, 3}},  {"mrg_w", {4, 5}},
        {"qn_s", {6, 7}},   {"qn_m", {8, 9}},   {"qn_w", {10, 11}},
        {"ql_s", {12, 13}}, {"ql_m", {14, 15}}, {"ql_w", {16, 17}},
    };
  }
  return {
      {"mrg_s", {0}},     {"mrg_m", {1}},     {"mrg_w", {2}},     {"bne_ql", {3}},
      {"ql_bne_s", {4}},  {"ql_bne_m", {5}},  {"ql_bne_w", {6}},  {"be_ql", {7}},
      {"ql_be_s", {8}},   {"ql_be_m", {9}},   {"ql_be_w", {10}},  {"bne_qn", {11}},
      {"qn_bne_s", {12}}, {"qn_bne_m", {13}}, {"qn_bne_w", {14}}, {"cne_ql", {15}},
      {"ql_cne_s", {16}}, {"ql_cne_m", {17}}, {"ql_cne_w", {18}},
  };
}

Dataset generate_dgp1(size_t n, uint64_t seed, const EffectStrengths& delta) {
  if (n < 4) throw InvalidArgument("generate_dgp1: n must be >= 4");
  Dataset ds = empty_binary_dataset(n);
  ds.p = 68;
  const char* tiers[3] = {"s", "m", "w"};
  const double deltas[3] = {delta.strong, delta.moderate, delta.weak};
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("mrg_") + tiers[t] + "_1"));
    ds.covariates.push_back(continuous_covariate(std::string("mrg_") + tiers[t] + "_2"));
  }
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("qn_") + tiers[t] + "_1"));
    ds.covariates.push_back(continuous_covariate(std::string("qn_") + tiers[t] + "_2"));
  }
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("ql_") + tiers[t] + "_1"));
    ds.covariates.push_back(continuous_covariate(std::string("ql_") + tiers[t] + "_2"));
  }
  for (int k = 1; k <= 50; ++k) {
    ds.covariates.push_back(continuous_covariate("no_" + std::to_string(k)));
  }
  ds.columns.assign(ds.p, std::vector<double>(n));

  Rng rng(derive_seed(seed, rng_tag::kDgp, 1));
  for (size_t i = 0; i < n; ++i) {
    const bool class2 = rng.uniform_double() < 0.5;
    ds.labels[i] = class2 ? 2 : 1;
    // Purely marginal effects: class-conditional mean shift.
    for (int t = 0; t < 3; ++t) {
      for (int rep = 0; rep < 2; ++rep) {
        ds.columns[static_cast<size_t>(2 * t + rep)][i] =
            rng.normal() + (class2 ? deltas[t] : 0.0);
      }
    }
    // Quantitative interactions: the partner has its own marginal shift and
    // amplifies the first member's shift where the partner is small.
    for (int t = 0; t < 3; ++t) {
      const double d = deltas[t];
      const double partner = rng.normal() + (class2 ? 0.5 * d : 0.0);
      const double shift = partner <= 0.0 ? d : 0.25 * d;
      const double member = rng.normal() + (class2 ? shift : 0.0);
      ds.columns[static_cast<size_t>(6 + 2 * t)][i] = member;
      ds.columns[static_cast<size_t>(6 + 2 * t + 1)][i] = partner;
    }
    // Qualitative interactions without marginal effects: opposite half-shifts
    // per class, flipped by the partner's sign. The class-conditional
    // marginals of both members are then identical symmetric mixtures, so no
    // single split on either covariate is discriminative on its own.
    for (int t = 0; t < 3; ++t) {
      const double d = deltas[t];
      const double partner = rng.normal();
      const double direction = partner > 0.0 ? 1.0 : -1.0;
      const double member =
          rng.normal() + (class2 ? 0.5 * d * direction : -0.5 * d * direction);
      ds.columns[static_cast<size_t>(12 + 2 * t)][i] = member;
      ds.columns[static_cast<size_t>(12 + 2 * t + 1)][i] = partner;
    }
    for (size_t c = 18; c < 68; ++c) ds.columns[c][i] = rng.normal();
  }
  return ds;
}

Dataset generate_dgp2(size_t n, uint64_t seed, const EffectStrengths& delta) {
  if (n < 4) throw InvalidArgument("generate_dgp2: n must be >= 4");
  Dataset ds = empty_binary_dataset(n);
  ds.p = 69;
  const char* tiers[3] = {"s", "m", "w"};
  const double deltas[3] = {delta.strong, delta.moderate, delta.weak};
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("mrg_") + tiers[t]));
  }
  ds.covariates.push_back(nominal_covariate("bne_ql", 2));
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("ql_bne_") + tiers[t]));
  }
  ds.covariates.push_back(nominal_covariate("be_ql", 2));
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("ql_be_") + tiers[t]));
  }
  ds.covariates.push_back(nominal_covariate("bne_qn", 2));
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("qn_bne_") + tiers[t]));
  }
  ds.covariates.push_back(nominal_covariate("cne_ql", 3));
  for (int t = 0; t < 3; ++t) {
    ds.covariates.push_back(continuous_covariate(std::string("ql_cne_") + tiers[t]));
  }
  for (int k = 1; k <= 50; ++k) {
    ds.covariates.push_back(continuous_covariate("no_" + std::to_string(k)));
  }
  ds.columns.assign(ds.p, std::vector<double>(n));

  constexpr double kBinaryMarginal = 0.15;  // P(level 2 | class 2) = 0.5 + this
  Rng rng(derive_seed(seed, rng_tag::kDgp, 2));
  for (size_t i = 0; i < n; ++i) {
    const bool class2 = rng.uniform_double() < 0.5;
    ds.labels[i] = class2 ? 2 : 1;
    for (int t = 0; t < 3; ++t) {
      ds.columns[static_cast<size_t>(t)][i] = rng.normal() + (class2 ? deltas[t] : 0.0);
    }
    // Binary partner without marginal effect; the continuous member gets
    // opposite half-shifts per class, flipped by the partner level, so its
    // class-conditional marginals coincide.
    const int bne_ql = rng.uniform_double() < 0.5 ? 1 : 2;
    ds.columns[3][i] = bne_ql;
    for (int t = 0; t < 3; ++t) {
      const double direction = bne_ql == 1 ? 1.0 : -1.0;
      ds.columns[static_cast<size_t>(4 + t)][i] =
          rng.normal() + (class2 ? 0.5 * deltas[t] * direction : -0.5 * deltas[t] * direction);
    }
    // Binary partner with a moderate marginal effect.
    const double p2 = class2 ? 0.5 + kBinaryMarginal : 0.5 - kBinaryMarginal;
    const int be_ql = rng.uniform_double() < p2 ? 2 : 1;
    ds.columns[7][i] = be_ql;
    for (int t = 0; t < 3; ++t) {
      const double direction = be_ql == 2 ? 1.0 : -1.0;
      ds.columns[static_cast<size_t>(8 + t)][i] =
          rng.normal() + (class2 ? 0.5 * deltas[t] * direction : -0.5 * deltas[t] * direction);
    }
    // Quantitative: the continuous member has an effect only where the
    // binary partner takes level 1.
    const int bne_qn = rng.uniform_double() < 0.5 ? 1 : 2;
    ds.columns[11][i] = bne_qn;
    for (int t = 0; t < 3; ++t) {
      const double shift = bne_qn == 1 ? deltas[t] : 0.0;
      ds.columns[static_cast<size_t>(12 + t)][i] = rng.normal() + (class2 ? shift : 0.0);
    }
    // Three-level partner, level 3 neutral.
    const double u = rng.uniform_double();
    const int cne_ql = u < 1.0 / 3.0 ? 1 : (u < 2.0 / 3.0 ? 2 : 3);
    ds.columns[15][i] = cne_ql;
    for (int t = 0; t < 3; ++t) {
      const double direction = cne_ql == 1 ? 1.0 : (cne_ql == 2 ? -1.0 : 0.0);
      ds.columns[static_cast<size_t>(16 + t)][i] =
          rng.normal() + (class2 ? 0.5 * deltas[t] * direction : -0.5 * deltas[t] * direction);
    }
    for (size_t c = 19; c < 69; ++c) ds.columns[c][i] = rng.normal();
  }
  return ds;
}

Dataset generate_dgp(const DgpSpec& spec, size_t n, uint64_t seed) {
  return spec.family == DgpFamily::Dgp1 ? generate_dgp1(n, seed, spec.delta)
                                        : generate_dgp2(n, seed, spec.delta);
}

std::string vim_method_name(VimMethod method) {
  return method == VimMethod::Unity ? "unity" : "perm";
}

namespace {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

} // namespace

VimAucEvaluation vim_auc_evaluation(const DgpSpec& spec, const std::vector<size_t>& sample_sizes,
                                    int replicates, const std::vector<VimMethod>& methods,
                                    const Hyperparams& hp_overrides, uint64_t seed, int workers) {
  if (replicates < 1) throw InvalidArgument("vim_auc_evaluation: replicates must be >= 1");
  const std::vector<CovariateType> types = spec.covariate_types();
  const std::vector<size_t> noise = spec.noise_covariates();

  VimAucEvaluation out;
  struct Accum {
    std::vector<double> aucs;
    std::vector<double> ranks;  // pooled individual representative ranks
  };
  // keyed by (type, n, method), filled in deterministic loop order
  std::vector<Accum> accums(types.size() * sample_sizes.size() * methods.size());
  auto accum_at = [&](size_t type_i, size_t n_i, size_t m_i) -> Accum& {
    return accums[(n_i * methods.size() + m_i) * types.size() + type_i];
  };

  for (size_t n_i = 0; n_i < sample_sizes.size(); ++n_i) {
    const size_t n = sample_sizes[n_i];
    for (int rep = 0; rep < replicates; ++rep) {
      const Dataset ds = generate_dgp(
          spec, n, derive_seed(seed, rng_tag::kReplicate, n_i, static_cast<uint64_t>(rep)));
      for (size_t m_i = 0; m_i < methods.size(); ++m_i) {
        const VimMethod method = methods[m_i];
        Hyperparams hp = resolve_hyperparams(hp_overrides, ds.p, ds.task);
        hp.seed = derive_seed(seed, rng_tag::kReplicate, n_i, static_cast<uint64_t>(rep),
                              m_i + 1);
        std::vector<double> values;
        if (method == VimMethod::Unity) {
          const Forest forest = train(ds, hp, RootMode::Unity, workers);
          const EncodedData data = forest.encode(ds);
          values = unity_vim(forest, data, hp.seed, workers).values;
        } else {
          const Forest forest = train(ds, hp, RootMode::PlainCart, workers);
          const EncodedData data = forest.encode(ds);
          values = permutation_vim_baseline(forest, data, hp.seed, workers);
        }
        const std::vector<size_t> ranks = vim_ranks(values);
        for (size_t type_i = 0; type_i < types.size(); ++type_i) {
          const CovariateType& type = types[type_i];
          const double type_auc = auc_groups(values, type.representatives, noise);
          std::vector<double> rep_ranks;
          for (const size_t c : type.representatives) {
            rep_ranks.push_back(static_cast<double>(ranks[c]));
          }
          SimRow row;
          row.replicate = rep;
          row.n = n;
          row.method = method;
          row.covariate_type = type.name;
          row.auc = type_auc;
          row.median_rank = quantile(rep_ranks, 0.5);
          out.rows.push_back(row);
          Accum& acc = accum_at(type_i, n_i, m_i);
          acc.aucs.push_back(type_auc);
          acc.ranks.insert(acc.ranks.end(), rep_ranks.begin(), rep_ranks.end());
        }
      }
    }
  }

  for (size_t n_i = 0; n_i < sample_sizes.size(); ++n_i) {
    for (size_t m_i = 0; m_i < methods.size(); ++m_i) {
      for (size_t type_i = 0; type_i < types.size(); ++type_i) {
        const Accum& acc = accum_at(type_i, n_i, m_i);
        VimAucCell cell;
        cell.covariate_type = types[type_i].name;
        cell.n = sample_sizes[n_i];
        cell.method = methods[m_i];
        double mean = 0.0;
        for (const double a : acc.aucs) mean += a;
        mean /= static_cast<double>(acc.aucs.size());
        double var = 0.0;
        for (const double a : acc.aucs) var += (a - mean) * (a - mean);
        const double se = acc.aucs.size() > 1
                              ? std::sqrt(var / static_cast<double>(acc.aucs.size() - 1)) /
                                    std::sqrt(static_cast<double>(acc.aucs.size()))
                              : 0.0;
        cell.mean_auc = mean;
        cell.ci_low = mean - 1.96 * se;
        cell.ci_high = mean + 1.96 * se;
        cell.median_rank = quantile(acc.ranks, 0.5);
        cell.rank_q1 = quantile(acc.ranks, 0.25);
        cell.rank_q3 = quantile(acc.ranks, 0.75);
        out.summary.push_back(cell);
      }
    }
  }
  return out;
}

void write_sim_rows_csv(const std::vector<SimRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << "replicate,n,method,covariate_type,auc,median_rank\n";
  for (const SimRow& row : rows) {
    out << row.replicate << ',' << row.n << ',' << vim_method_name(row.method) << ','
        << row.covariate_type << ',' << format_double(row.auc) << ','
        << format_double(row.median_rank) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

} // namespace unityforest
