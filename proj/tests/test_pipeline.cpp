#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/pipeline.hpp"
#include "sparsereg/simulate.hpp"

using namespace sparsereg;

namespace {

CohortSpec small_spec() {
  CohortSpec s = default_cohort_spec();
  s.n = 500;
  s.n_genetic = 300;
  s.n_imaging = 104;
  s.p_genes = 300;
  s.group_sizes = {120, 100, 160, 120};
  return s;
}

const SimulatedCohort& cohort() {
  static const SimulatedCohort c = simulate_cohort(small_spec(), 21);
  return c;
}

PipelineConfig quick_config() {
  PipelineConfig c;
  c.seed = 9;
  c.folds = 5;
  return c;
}

bool contains_all(const std::set<std::string>& set, const std::vector<std::string>& names) {
  return std::all_of(names.begin(), names.end(), [&](const auto& n) { return set.count(n) > 0; });
}

bool contains_none(const std::set<std::string>& set, const std::vector<std::string>& names) {
  return std::none_of(names.begin(), names.end(), [&](const auto& n) { return set.count(n) > 0; });
}

}  // namespace

TEST(Logit, Examples) {
  EXPECT_EQ(logit_transform(0.5), 0.0);
  EXPECT_NEAR(logit_transform(0.75), 1.098612, 1e-6);
  EXPECT_NEAR(logit_transform(1.0, 1e-6), std::log((1 - 1e-6) / 1e-6), 1e-9);
  EXPECT_NEAR(logit_transform(1.0, 1e-6), 13.8155, 1e-4);
  EXPECT_NEAR(logit_transform(0.0, 1e-6), -13.8155, 1e-4);
}

TEST(PipelineConfig, DefaultsAndParsing) {
  const PipelineConfig d;
  EXPECT_EQ(d.folds, 10);
  EXPECT_EQ(d.imaging_folds, 4);
  EXPECT_EQ(d.top_k_cognitive, 75u);
  EXPECT_EQ(d.top_k_imaging, 50u);
  EXPECT_EQ(d.significance, 0.05);
  EXPECT_EQ(d.epsilon, 1e-6);
  EXPECT_EQ(d.lambda_rule, LambdaRule::min);

  const auto c = parse_pipeline_config(
      R"({"spec_version": 1, "seed": 3, "folds": 5, "lambda_rule": "1se", "merge": "intersection"})");
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.folds, 5);
  EXPECT_EQ(c.lambda_rule, LambdaRule::one_se);
  EXPECT_EQ(c.merge, MergeRule::intersection_of_pairs);
  EXPECT_TRUE(c.standardize_predictors);
  EXPECT_FALSE(parse_pipeline_config(R"({"spec_version": 1, "standardize_predictors": false})")
                   .standardize_predictors);
  EXPECT_EQ(pipeline_config_json(parse_pipeline_config(pipeline_config_json(c))),
            pipeline_config_json(c));

  try {
    parse_pipeline_config(R"({"spec_version": 1, "fold": 5})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("fold"), std::string::npos);
  }
  EXPECT_THROW(parse_pipeline_config(R"({"folds": 5})"), ConfigError);
  EXPECT_THROW(parse_pipeline_config(R"({"spec_version": 1, "folds": "ten"})"), ConfigError);
}

TEST(LowDimStage, TablesAndCollinearityFilter) {
  ReportTree tree;
  const auto report = run_low_dim_stage(cohort().data, quick_config(), &tree);
  ASSERT_EQ(report.filter.dropped.size(), 1u);
  EXPECT_EQ(report.filter.dropped[0].first, "PTAU");
  EXPECT_EQ(report.filter.dropped[0].second, "TAU");
  EXPECT_EQ(report.ols.size(), 2u);
  EXPECT_EQ(report.ordinal.slopes.size(), 6);
  EXPECT_TRUE(tree.contains("low_dim/ols_MMSE.tsv"));
  EXPECT_TRUE(tree.contains("low_dim/ordinal_forest.tsv"));
  EXPECT_TRUE(tree.contains("low_dim/cohort_summary.tsv"));
}

TEST(CognitiveStage, RecoversSharedGenes) {
  ReportTree tree;
  const auto report = run_cognitive_stage(cohort().data, quick_config(), &tree);
  EXPECT_TRUE(contains_all(report.intersection, cohort().truth.cross_outcome_genes));
  for (const auto& [name, sel] : report.outcomes) {
    EXPECT_LE(sel.top.size(), 75u);
    for (const auto& t : sel.top) EXPECT_TRUE(sel.selected.count(t.name));
  }
  EXPECT_TRUE(tree.contains("cognitive/MMSE_top.tsv"));
  EXPECT_TRUE(tree.contains("cognitive/intersection.txt"));
}

TEST(CognitiveStage, NullGenesGiveNearEmptyIntersection) {
  CohortSpec spec = small_spec();
  const CohortSpec null = null_cohort_spec();
  spec.mmse.genes = null.mmse.genes;
  spec.cdrsb.genes = null.cdrsb.genes;
  // Disease genes shift the stage, and the stage shifts both scores.
  spec.disease.genes = null.disease.genes;
  int near_empty = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const auto c = simulate_cohort(spec, 100 + seed);
    const auto report = run_cognitive_stage(c.data, quick_config(), nullptr);
    near_empty += report.intersection.size() <= 1;
  }
  EXPECT_GE(near_empty, 9);
}

TEST(CognitiveStage, ScreeningOutsideFoldsOverfitsNull) {
  // Screening on all rows before CV lets held-out loss reward noise genes.
  CohortSpec spec = small_spec();
  const CohortSpec null = null_cohort_spec();
  spec.mmse.genes = null.mmse.genes;
  spec.cdrsb.genes = null.cdrsb.genes;
  spec.disease.genes = null.disease.genes;
  const auto c = simulate_cohort(spec, 100);
  PipelineConfig cfg = quick_config();
  cfg.cognitive_outcomes = {"MMSE"};
  cfg.screen_within_folds = false;
  const auto leaky = run_cognitive_stage(c.data, cfg, nullptr);
  cfg.screen_within_folds = true;
  const auto honest = run_cognitive_stage(c.data, cfg, nullptr);
  EXPECT_GT(leaky.outcomes.at("MMSE").selected.size(), 10u);
  EXPECT_LE(honest.outcomes.at("MMSE").selected.size(), 2u);
}

TEST(DiseaseStage, SixScreensAndSetAlgebra) {
  ReportTree tree;
  PipelineConfig cfg = quick_config();
  cfg.sis_keep = 20;
  const auto report = run_disease_stage(cohort().data, cfg, &tree);
  EXPECT_EQ(report.screens.size(), 6u);
  EXPECT_EQ(report.pair_sets.size(), 6u);
  for (const auto& g : report.sets.intersection) EXPECT_TRUE(report.sets.union_set.count(g));
  EXPECT_TRUE(contains_all(report.sets.union_set, cohort().truth.disease_genes));
  int screen_files = 0;
  for (const auto& [path, content] : tree.files())
    screen_files += path.rfind("disease/screen_", 0) == 0;
  EXPECT_EQ(screen_files, 6);
}

TEST(ImagingStage, RegionStructure) {
  ReportTree tree;
  const auto report = run_imaging_stage(cohort().data, cohort().partition, quick_config(), &tree);
  ASSERT_EQ(report.regions.size(), 3u);
  for (const auto& [region, result] : report.regions) {
    EXPECT_LE(result.top.size(), 50u);
    EXPECT_EQ(result.cv.n_folds, 4);
    EXPECT_TRUE(tree.contains("imaging/" + std::string(region_code(region)) + "_top.tsv"));
  }
  const auto& lr = report.intersections.at("LB_RB");
  const auto& all = report.intersections.at("LB_CC_RB");
  EXPECT_TRUE(contains_all(lr, cohort().truth.hemisphere_only_genes));
  EXPECT_TRUE(contains_none(all, cohort().truth.hemisphere_only_genes));
  EXPECT_TRUE(contains_all(all, cohort().truth.all_region_genes));
  for (const auto& g : all) EXPECT_TRUE(lr.count(g));
}

TEST(ImagingStage, MissingPartitionOrBlock) {
  try {
    run_imaging_stage(cohort().data, RegionPartition{}, quick_config(), nullptr);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("FA"), std::string::npos);
  }
  CohortSpec spec = small_spec();
  spec.fa_block = false;
  const auto bare = simulate_cohort(spec, 1);
  EXPECT_THROW(run_imaging_stage(bare.data, cohort().partition, quick_config(), nullptr), Error);
}

TEST(FullPipeline, DeterministicAndStageIndependent) {
  PipelineConfig cfg = quick_config();
  cfg.disease = false;
  const auto a = run_full_pipeline(cohort().data, cohort().partition, cfg);
  const auto b = run_full_pipeline(cohort().data, cohort().partition, cfg);
  EXPECT_EQ(a.tree.manifest_json(), b.tree.manifest_json());
  EXPECT_TRUE(a.tree.contains("metadata.json"));
  EXPECT_TRUE(a.tree.contains("config.json"));

  PipelineConfig no_imaging = cfg;
  no_imaging.imaging = false;
  const auto c = run_full_pipeline(cohort().data, cohort().partition, no_imaging);
  for (const auto& [path, content] : c.tree.files()) {
    EXPECT_EQ(path.rfind("imaging/", 0), std::string::npos) << path;
    if (path.rfind("cognitive/", 0) == 0 || path.rfind("low_dim/", 0) == 0) {
      EXPECT_EQ(content, a.tree.content(path)) << path;
    }
  }

  PipelineConfig threaded = cfg;
  threaded.threads = 3;
  const auto t = run_full_pipeline(cohort().data, cohort().partition, threaded);
  EXPECT_EQ(t.tree.manifest_json(), a.tree.manifest_json());
}

TEST(FullPipeline, StageErrorsCarryStageName) {
  PipelineConfig cfg = quick_config();
  cfg.cognitive_outcomes = {"NOPE"};
  cfg.low_dim = cfg.disease = cfg.imaging = false;
  try {
    run_full_pipeline(cohort().data, cohort().partition, cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "cognitive");
    EXPECT_TRUE(e.is_usage());
    EXPECT_NE(std::string(e.what()).find("NOPE"), std::string::npos);
  }
}

TEST(Report, FormattingAndHashing) {
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(format_number(123456789.0), "1.23457e+08");
  EXPECT_EQ(format_number(std::nan("")), "NA");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Report, AtomicCommitWithManifest) {
  const auto dir = oracle::scratch_dir("report");
  ReportTree tree;
  tree.add("b/one.tsv", "x\ty");
  tree.add("a.txt", "hello\n");
  EXPECT_EQ(tree.content("b/one.tsv"), "x\ty\n");
  const auto out = dir / "out";
  std::filesystem::create_directories(out / "stale");
  tree.commit(out);
  EXPECT_FALSE(std::filesystem::exists(out / "stale"));
  EXPECT_EQ(read_text_file(out / "a.txt"), "hello\n");
  const std::string manifest = read_text_file(out / "manifest.json");
  EXPECT_NE(manifest.find(sha256_hex("hello\n")), std::string::npos);
  EXPECT_LT(manifest.find("a.txt"), manifest.find("b/one.tsv"));
  std::filesystem::remove_all(dir);
}
