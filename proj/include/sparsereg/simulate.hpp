#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/region.hpp"

namespace sparsereg {

using EffectMap = std::map<std::string, double>;

struct OutcomeEffects {
  EffectMap genes;
  EffectMap clinical;          // effects per clinical sd
  std::vector<double> stage;   // additive shift per disease stage; empty = none
};

/// Generator configuration for a synthetic genetics-and-imaging cohort.
///
/// Rows 0..n_genetic-1 carry gene expression, rows 0..n_imaging-1 also carry
/// the FA block; the rest are missing there. Gene and clinical effects are in
/// units of the predictor's sd.
struct CohortSpec {
  std::size_t n = 1631;
  std::size_t n_genetic = 468;
  std::size_t n_imaging = 104;
  std::size_t p_clinical = 0;  // extra generic covariates CLIN_01...
  std::size_t p_genes = 2000;
  double noise_sd = 1.0;

  std::vector<std::string> disease_labels{"CN", "EMCI", "LMCI", "AD"};
  // Exact per-stage counts by ranking the latent disease score. When empty,
  // stages are drawn from the proportional-odds model with ordinal_thresholds.
  std::vector<std::size_t> group_sizes{417, 310, 562, 342};
  std::vector<double> ordinal_thresholds{-1.0, 0.0, 1.5};

  bool fa_block = true;
  std::vector<std::size_t> fa_counts{23, 11, 23};
  double fa_noise_sd = 0.15;
  double fa_shared_sd = 0.15;

  OutcomeEffects mmse;
  OutcomeEffects cdrsb;
  OutcomeEffects disease;
  std::map<Region, EffectMap> fa;
};

/// Planted structure derived from a spec, for oracle tests.
struct GroundTruth {
  std::vector<std::string> mmse_genes;
  std::vector<std::string> cdrsb_genes;
  std::vector<std::string> cross_outcome_genes;
  std::vector<std::string> disease_genes;
  std::vector<std::string> all_region_genes;
  std::vector<std::string> hemisphere_only_genes;
  std::map<Region, std::vector<std::string>> region_genes;
};

struct SimulatedCohort {
  Dataset data;
  GroundTruth truth;
  RegionPartition partition;  // empty when fa_block is off
};

std::string gene_name(std::size_t index);  // 0-based -> "GENE00001"
std::string fa_name(Region region, std::size_t index);

/// The default planted design: shared and outcome-specific cognitive genes,
/// stage-wide disease genes, all-region and hemisphere-only FA genes.
CohortSpec default_cohort_spec();
/// Same shapes as the default with every effect set to zero.
CohortSpec null_cohort_spec();

CohortSpec parse_cohort_spec(const std::string& json_text);
std::string cohort_spec_json(const CohortSpec& spec);
void validate(const CohortSpec& spec);

GroundTruth ground_truth(const CohortSpec& spec);
std::string ground_truth_json(const GroundTruth& truth, const CohortSpec& spec);

SimulatedCohort simulate_cohort(const CohortSpec& spec, std::uint64_t seed);

/// Schema matching the columns simulate_cohort writes.
Schema simulated_schema(const CohortSpec& spec);
std::string simulated_schema_json(const CohortSpec& spec);

}  // namespace sparsereg
