#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unityforest/cv.hpp"
#include "unityforest/data.hpp"

namespace unityforest {

enum class DgpFamily { Dgp1, Dgp2 };

// Effect-strength tiers shared by both generators.
struct EffectStrengths {
  double strong = 1.5;
  double moderate = 1.0;
  double weak = 0.5;
};

// Covariate type descriptor: names like "mrg_s" or "ql_bne_m", with the
// covariate indices representing the type and the noise covariate indices.
struct CovariateType {
  std::string name;
  std::vector<size_t> representatives;
};

struct DgpSpec {
  DgpFamily family = DgpFamily::Dgp1;
  EffectStrengths delta;

  size_t num_covariates() const;
  std::vector<CovariateType> covariate_types() const;
  std::vector<size_t> noise_covariates() const;
};

// Balanced binary outcome; marginal effects are class-conditional mean
// shifts, interaction effects condition the shift on the partner covariate.
// 68 continuous covariates (18 informative, 50 noise).
Dataset generate_dgp1(size_t n, uint64_t seed, const EffectStrengths& delta = {});

// 69 covariates: 19 informative of which four are categorical (two binary
// partners without and with a marginal effect, one binary quantitative
// partner, one three-level partner with neutral third level), 50 noise.
Dataset generate_dgp2(size_t n, uint64_t seed, const EffectStrengths& delta = {});

Dataset generate_dgp(const DgpSpec& spec, size_t n, uint64_t seed);

enum class VimMethod { Unity, PermutationBaseline };

std::string vim_method_name(VimMethod method);

struct SimRow {
  int replicate = 0;
  size_t n = 0;
  VimMethod method = VimMethod::Unity;
  std::string covariate_type;
  double auc = 0.0;
  double median_rank = 0.0;  // median rank of the type's representatives
};

struct VimAucCell {
  std::string covariate_type;
  size_t n = 0;
  VimMethod method = VimMethod::Unity;
  double mean_auc = 0.0;
  double ci_low = 0.0;   // mean +- 1.96 * SE
  double ci_high = 0.0;
  double median_rank = 0.0;
  double rank_q1 = 0.0;
  double rank_q3 = 0.0;
};

struct VimAucEvaluation {
  std::vector<SimRow> rows;        // one per (replicate, n, method, type)
  std::vector<VimAucCell> summary;  // aggregated over replicates
};

// Per covariate type: AUC of the VIM values separating the type's
// representatives from the noise covariates, averaged over replicates, with
// normal-approximation confidence intervals and median ranks with quartiles.
VimAucEvaluation vim_auc_evaluation(const DgpSpec& spec, const std::vector<size_t>& sample_sizes,
                                    int replicates, const std::vector<VimMethod>& methods,
                                    const Hyperparams& hp_overrides, uint64_t seed, int workers);

void write_sim_rows_csv(const std::vector<SimRow>& rows, const std::string& path);

} // namespace unityforest
