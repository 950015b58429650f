#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/lasso.hpp"
#include "sparsereg/linear.hpp"
#include "sparsereg/multinomial.hpp"
#include "sparsereg/multitask.hpp"
#include "sparsereg/ordinal.hpp"
#include "sparsereg/region.hpp"
#include "sparsereg/report.hpp"
#include "sparsereg/screening.hpp"

namespace sparsereg {

enum class MergeRule { union_of_pairs, intersection_of_pairs };

/// Pipeline settings. Defaults:
/// 10 CV folds, 4 for the small imaging subsample, top 75 genes per cognitive
/// outcome, top 50 per brain region, significance 0.05.
struct PipelineConfig {
  std::uint64_t seed = 1;

  bool low_dim = true;
  bool cognitive = true;
  bool disease = true;
  bool imaging = true;

  std::vector<std::string> cognitive_outcomes{"MMSE", "CDRSB"};
  std::string disease_column = "DX";
  std::vector<std::string> disease_levels{"CN", "EMCI", "LMCI", "AD"};
  std::string gene_prefix = "GENE";
  std::vector<std::string> gene_columns;  // overrides gene_prefix when set

  std::vector<std::string> clinical_predictors{"AGE", "PTEDUCAT", "APOE4", "ABETA",
                                               "TAU", "PTAU", "RAVLT"};
  std::vector<std::string> ordinal_predictors{"MMSE", "CDRSB", "APOE4", "AGE",
                                              "PTEDUCAT", "RAVLT"};
  std::string stage_reference = "CN";  // reference level for stage dummies in OLS
  double correlation_threshold = 0.98;
  double significance = 0.05;
  double ci_level = 0.95;

  int folds = 10;
  int imaging_folds = 4;
  std::size_t top_k_cognitive = 75;
  std::size_t top_k_imaging = 50;
  std::size_t sis_keep = 0;  // 0 = ceil(n / ln n)
  LambdaRule lambda_rule = LambdaRule::min;
  double epsilon = 1e-6;
  MergeRule merge = MergeRule::union_of_pairs;
  bool per_region_screening = true;
  bool screen_within_folds = true;  // re-screen on each CV training split
  bool standardize_predictors = true;
  bool standardize_responses = true;
  bool check_partition_counts = true;
  int threads = 0;
};

PipelineConfig parse_pipeline_config(const std::string& json_text);
std::string pipeline_config_json(const PipelineConfig& config);

/// Clamped logit: ln(v' / (1 - v')), v' = min(max(v, eps), 1 - eps).
double logit_transform(double v, double epsilon = 1e-6);

struct LowDimReport {
  CorrelationFilterResult filter;
  std::map<std::string, OlsFit> ols;
  OrdinalFit ordinal;
  CohortSummary summary;
};

struct OutcomeSelection {
  ScreenResult screen;
  CvResult cv;
  double lambda = 0.0;
  std::vector<WeightedTerm> top;
  std::set<std::string> selected;  // every nonzero gene at lambda
};

struct CognitiveReport {
  std::map<std::string, OutcomeSelection> outcomes;
  std::set<std::string> intersection;
};

struct DiseaseReport {
  std::map<LevelPair, ScreenResult> screens;
  std::vector<std::string> screened;
  CvResult cv;
  MultinomialFit fit;
  std::map<LevelPair, std::set<std::string>> pair_sets;
  GeneSets sets;
};

struct RegionResult {
  ScreenResult screen;
  CvResult cv;
  MultiTaskFit fit;
  std::vector<WeightedTerm> top;
};

struct ImagingReport {
  std::map<Region, RegionResult> regions;
  std::map<std::string, std::set<std::string>> intersections;  // "LB_RB", "LB_CC_RB", ...
};

struct PipelineReport {
  std::optional<LowDimReport> low_dim;
  std::optional<CognitiveReport> cognitive;
  std::optional<DiseaseReport> disease;
  std::optional<ImagingReport> imaging;
  ReportTree tree;
};

/// Stage entry points. Each stage draws its own fold seeds from
/// (config.seed, stage), so toggling one stage never perturbs another.
LowDimReport run_low_dim_stage(const Dataset& d, const PipelineConfig& config, ReportTree* tree);
CognitiveReport run_cognitive_stage(const Dataset& d, const PipelineConfig& config,
                                    ReportTree* tree);
DiseaseReport run_disease_stage(const Dataset& d, const PipelineConfig& config, ReportTree* tree);
ImagingReport run_imaging_stage(const Dataset& d, const RegionPartition& partition,
                                const PipelineConfig& config, ReportTree* tree);

/// Runs the enabled stages in order and assembles the report tree, including
/// run metadata and cross-stage intersections. Errors carry the stage name.
PipelineReport run_full_pipeline(const Dataset& d, const RegionPartition& partition,
                                 const PipelineConfig& config);

/// run_full_pipeline followed by an atomic commit to `out`.
PipelineReport run_pipeline_to(const Dataset& d, const RegionPartition& partition,
                               const PipelineConfig& config, const std::filesystem::path& out);

/// Gene columns per config (explicit list, else prefix match).
std::vector<std::string> gene_columns(const Dataset& d, const PipelineConfig& config);

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, bool usage)
      : Error(stage + " stage: " + what), stage_(std::move(stage)), usage_(usage) {}
  const std::string& stage() const { return stage_; }
  bool is_usage() const { return usage_; }

 private:
  std::string stage_;
  bool usage_;
};

}  // namespace sparsereg
