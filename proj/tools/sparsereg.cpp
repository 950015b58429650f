// sparsereg command-line front end.
//
// Exit codes: 0 success, 1 modeling failure (non-convergence, separation,
// rank deficiency), 2 usage or configuration failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsereg/dataset.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"
#include "sparsereg/lasso.hpp"
#include "sparsereg/linear.hpp"
#include "sparsereg/multinomial.hpp"
#include "sparsereg/multitask.hpp"
#include "sparsereg/ordinal.hpp"
#include "sparsereg/pipeline.hpp"
#include "sparsereg/report.hpp"
#include "sparsereg/screening.hpp"
#include "sparsereg/simulate.hpp"

namespace sr = sparsereg;

namespace {

constexpr int kOk = 0;
constexpr int kModelFailure = 1;
constexpr int kUsageFailure = 2;

struct Common {
  std::string input;
  std::string schema;
  std::string outcome;
  std::string predictors;
  std::string out;
  std::string levels;
  std::vector<std::string> dummies;
  std::uint64_t seed = 1;
  int folds = 10;
  std::size_t top_k = 0;  // 0 = per-model default
  std::size_t keep = 0;
  std::string lambda_rule = "min";
  double epsilon = 1e-6;
  double ci_level = 0.95;
  bool logit = false;
  bool raw_scale = false;
  int threads = 0;
};

bool use_color() { return isatty(2) && std::getenv("SPARSEREG_NO_COLOR") == nullptr; }

void report_error(const std::string& message) {
  if (use_color()) std::cerr << "\033[31merror:\033[0m " << message << "\n";
  else std::cerr << "error: " << message << "\n";
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

sr::Dataset load(const Common& c) {
  if (c.input.empty()) throw sr::ConfigError("--input is required");
  sr::Schema schema;
  if (!c.schema.empty()) schema = sr::load_schema(c.schema);
  if (!std::filesystem::exists(c.input)) throw sr::DataError("input file '" + c.input + "' not found");
  // --outcome names outcome columns the schema leaves unassigned, so text
  // categories survive ingestion without a schema file.
  for (const auto& name : split(c.outcome, ',')) schema.roles.try_emplace(name, sr::Role::outcome);
  return sr::load_csv(c.input, schema);
}

// Comma list; an entry ending in '*' expands to every predictor-role column
// with that prefix. Empty means every predictor-role column.
std::vector<std::string> resolve_predictors(const sr::Dataset& d, const std::string& spec) {
  if (spec.empty()) return d.names_with_role(sr::Role::predictor);
  std::vector<std::string> out;
  for (const auto& item : split(spec, ',')) {
    if (!item.empty() && item.back() == '*') {
      const auto matches = d.names_with_prefix(item.substr(0, item.size() - 1));
      std::size_t added = 0;
      for (const auto& m : matches)
        if (d.column(m).role == sr::Role::predictor) {
          out.push_back(m);
          ++added;
        }
      if (!added) throw sr::ConfigError("--predictors pattern '" + item + "' matches no predictor");
    } else {
      if (!d.has(item)) throw sr::DataError("predictor column '" + item + "' is absent");
      out.push_back(item);
    }
  }
  if (out.empty()) throw sr::ConfigError("--predictors is empty");
  return out;
}

std::vector<std::string> outcomes(const Common& c) {
  if (c.outcome.empty()) throw sr::ConfigError("--outcome is required");
  return split(c.outcome, ',');
}

void require_out(const Common& c) {
  if (c.out.empty()) throw sr::ConfigError("--out is required");
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void commit(const sr::ReportTree& tree, const std::string& out) {
  tree.commit(out);
  std::cout << "wrote " << tree.files().size() << " files to " << out << "\n";
}

sr::PathConfig path_config(const Common& c) {
  sr::PathConfig config;
  config.standardize = !c.raw_scale;
  return config;
}

std::string cv_tsv(const sr::CvResult& cv) {
  std::string out = "lambda\tcv_mean\tcv_se\tn_nonzero\n";
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l)
    out += sr::format_number(cv.lambdas[l]) + "\t" + sr::format_number(cv.cv_mean[l]) + "\t" +
           sr::format_number(cv.cv_se[l]) + "\t" + std::to_string(cv.path.points[l].n_nonzero) +
           "\n";
  return out;
}

std::string selection_json(const sr::CvResult& cv, sr::LambdaRule rule, std::size_t rows) {
  nlohmann::ordered_json j;
  j["rows"] = rows;
  j["folds"] = cv.n_folds;
  j["lambda_rule"] = std::string(sr::lambda_rule_name(rule));
  j["lambda"] = cv.selected(rule);
  j["lambda_min"] = cv.lambda_min;
  j["lambda_1se"] = cv.lambda_1se;
  j["lambda_max"] = cv.path.lambda_max;
  return j.dump(2);
}

// ---------------------------------------------------------------- fit

int fit_ols(const Common& c) {
  require_out(c);
  sr::Dataset d = load(c);
  const auto y = outcomes(c);
  if (y.size() != 1) throw sr::ConfigError("ols takes one --outcome");
  auto predictors = resolve_predictors(d, c.predictors);
  for (const auto& spec : c.dummies) {
    const auto parts = split(spec, ':');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
      throw sr::ConfigError("--dummy expects column:reference, got '" + spec + "'");
    d = sr::drop_incomplete(d, {parts[0]});
    const auto cat = sr::categorical_outcome(d, parts[0]);
    d = sr::expand_dummies(d, parts[0], cat.labels, parts[1]);
    std::erase(predictors, parts[0]);
    for (const auto& level : cat.labels)
      if (level != parts[1]) predictors.push_back(parts[0] + "_" + level);
  }
  d = sr::drop_incomplete(d, concat(predictors, y));
  const sr::OlsFit fit = sr::fit_ols(d, y[0], predictors);
  sr::ReportTree tree;
  tree.add("ols.tsv", sr::ols_tsv(fit));
  nlohmann::ordered_json j;
  j["n"] = fit.n;
  j["residual_df"] = fit.residual_df;
  j["sigma"] = fit.sigma;
  j["r_squared"] = fit.r_squared;
  j["adjusted_r_squared"] = fit.adjusted_r_squared;
  tree.add("ols_summary.json", j.dump(2));
  commit(tree, c.out);
  return kOk;
}

int fit_ordinal(const Common& c) {
  require_out(c);
  const sr::Dataset raw = load(c);
  const auto y = outcomes(c);
  if (y.size() != 1) throw sr::ConfigError("ordinal takes one --outcome");
  const auto predictors = resolve_predictors(raw, c.predictors);
  const sr::Dataset d = sr::drop_incomplete(raw, concat(predictors, y));
  const auto outcome = sr::categorical_outcome(d, y[0], split(c.levels, ','));
  const sr::OrdinalFit fit = sr::fit_ordinal(d, outcome, predictors);
  sr::ReportTree tree;
  tree.add("forest.tsv", sr::forest_tsv(sr::forest_data(fit, c.ci_level)));
  std::string thr = "threshold\testimate\tstd_error\n";
  for (Eigen::Index j = 0; j < fit.thresholds.size(); ++j)
    thr += fit.labels[static_cast<std::size_t>(j)] + "|" + fit.labels[static_cast<std::size_t>(j) + 1] +
           "\t" + sr::format_number(fit.thresholds[j]) + "\t" +
           sr::format_number(fit.threshold_std_errors[j]) + "\n";
  tree.add("thresholds.tsv", thr);
  nlohmann::ordered_json j;
  j["labels"] = fit.labels;
  j["log_likelihood"] = fit.log_likelihood;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  tree.add("ordinal_summary.json", j.dump(2));
  commit(tree, c.out);
  return kOk;
}

int fit_lasso(const Common& c) {
  require_out(c);
  const sr::Dataset raw = load(c);
  const auto y = outcomes(c);
  if (y.size() != 1) throw sr::ConfigError("lasso takes one --outcome");
  const auto predictors = resolve_predictors(raw, c.predictors);
  const sr::Dataset d = sr::drop_incomplete(raw, concat(predictors, y));
  const auto rule = sr::parse_lambda_rule(c.lambda_rule);
  const auto folds = sr::make_folds(d.n_rows(), c.folds, c.seed);
  const sr::CvResult cv = sr::cv_lasso(d.matrix(predictors), d.vector(y[0]), predictors, folds,
                                       path_config(c));
  const auto top = sr::nonzero_report(cv.path, cv.selected(rule), c.top_k ? c.top_k : 75);
  sr::ReportTree tree;
  tree.add("cv.tsv", cv_tsv(cv));
  tree.add("selection.json", selection_json(cv, rule, d.n_rows()));
  tree.add("top.tsv", sr::nonzero_report_tsv(top));
  commit(tree, c.out);
  return kOk;
}

int fit_multinomial(const Common& c) {
  require_out(c);
  const sr::Dataset raw = load(c);
  const auto y = outcomes(c);
  if (y.size() != 1) throw sr::ConfigError("multinomial takes one --outcome");
  const auto predictors = resolve_predictors(raw, c.predictors);
  const sr::Dataset d = sr::drop_incomplete(raw, concat(predictors, y));
  const auto outcome = sr::categorical_outcome(d, y[0], split(c.levels, ','));
  const auto rule = sr::parse_lambda_rule(c.lambda_rule);
  const sr::Matrix X = d.matrix(predictors);
  const auto folds = sr::make_folds(d.n_rows(), c.folds, c.seed);
  const sr::CvResult cv = sr::cv_multinomial(X, outcome, predictors, folds, path_config(c));
  const sr::MultinomialFit fit =
      sr::multinomial_fit_at(cv.path, cv.selected_index(rule), X, outcome.codes);
  sr::ReportTree tree;
  tree.add("cv.tsv", cv_tsv(cv));
  tree.add("selection.json", selection_json(cv, rule, d.n_rows()));
  tree.add("fit.json", sr::multinomial_fit_json(fit));
  std::vector<std::set<std::string>> sets;
  for (const auto& [pair, names] : sr::pairwise_active(fit)) {
    tree.add("active_" + pair.first + "_vs_" + pair.second + ".txt", sr::name_list(names));
    sets.push_back(names);
  }
  const auto gs = sr::gene_sets(sets);
  tree.add("union.txt", sr::name_list(gs.union_set));
  tree.add("intersection.txt", sr::name_list(gs.intersection));
  commit(tree, c.out);
  return kOk;
}

int fit_multitask(const Common& c) {
  require_out(c);
  const sr::Dataset raw = load(c);
  const auto responses = outcomes(c);
  const auto predictors = resolve_predictors(raw, c.predictors);
  const sr::Dataset d = sr::drop_incomplete(raw, concat(predictors, responses));
  sr::Matrix Y = d.matrix(responses);
  if (c.logit) Y = Y.unaryExpr([&](double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw sr::DataError("--logit needs responses in [0, 1]");
    return sr::logit_transform(v, c.epsilon);
  });
  const auto rule = sr::parse_lambda_rule(c.lambda_rule);
  const auto folds = sr::make_folds(d.n_rows(), c.folds, c.seed);
  const sr::CvResult cv = sr::cv_multitask(d.matrix(predictors), Y, predictors, responses, folds,
                                           path_config(c));
  const sr::MultiTaskFit fit = sr::multitask_fit_at(cv.path, cv.selected_index(rule));
  sr::ReportTree tree;
  tree.add("cv.tsv", cv_tsv(cv));
  tree.add("selection.json", selection_json(cv, rule, d.n_rows()));
  tree.add("fit.json", sr::multitask_fit_json(fit));
  tree.add("top.tsv", sr::nonzero_report_tsv(sr::rank_rows(fit, c.top_k ? c.top_k : 50)));
  commit(tree, c.out);
  return kOk;
}

int fit_sis(const Common& c) {
  require_out(c);
  const sr::Dataset raw = load(c);
  const auto y = outcomes(c);
  const auto predictors = resolve_predictors(raw, c.predictors);
  const sr::Dataset d = sr::drop_incomplete(raw, concat(predictors, y));
  const std::size_t keep = c.keep ? c.keep : sr::default_screen_size(d.n_rows());
  const sr::Matrix X = d.matrix(predictors);
  const sr::ScreenResult res = y.size() == 1
                                   ? sr::sis_screen(X, d.vector(y[0]), predictors, keep)
                                   : sr::sis_screen_multi(X, d.matrix(y), predictors, keep);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  sr::ReportTree tree;
  tree.add("screen.tsv", sr::screen_tsv(res));
  commit(tree, c.out);
  return kOk;
}

// ---------------------------------------------------------------- other commands

struct SimulateArgs {
  std::string out;
  std::string config;
  std::uint64_t seed = 1;
  bool null_effects = false;
};

int simulate(const SimulateArgs& a) {
  if (a.out.empty()) throw sr::ConfigError("--out is required");
  sr::CohortSpec spec = a.null_effects ? sr::null_cohort_spec() : sr::default_cohort_spec();
  if (!a.config.empty()) {
    if (!std::filesystem::exists(a.config))
      throw sr::ConfigError("spec file '" + a.config + "' not found");
    spec = sr::parse_cohort_spec(sr::read_text_file(a.config));
  }
  const sr::SimulatedCohort cohort = sr::simulate_cohort(spec, a.seed);
  sr::ReportTree tree;
  tree.add("cohort.csv", sr::to_csv(cohort.data));
  tree.add("schema.json", sr::simulated_schema_json(spec));
  tree.add("truth.json", sr::ground_truth_json(cohort.truth, spec));
  tree.add("spec.json", sr::cohort_spec_json(spec));
  if (spec.fa_block) tree.add("partition.csv", sr::partition_csv(cohort.partition));
  commit(tree, a.out);
  return kOk;
}

struct PipelineArgs {
  Common common;
  std::string partition;
  std::string config;
  int imaging_folds = 4;
  std::size_t imaging_top_k = 50;
  bool no_partition_check = false;
  bool skip_low_dim = false;
  bool skip_cognitive = false;
  bool skip_disease = false;
  bool skip_imaging = false;
};

int pipeline(const PipelineArgs& a, const CLI::App& cmd) {
  const Common& c = a.common;
  require_out(c);
  sr::PipelineConfig config;
  if (!a.config.empty()) {
    if (!std::filesystem::exists(a.config))
      throw sr::ConfigError("config file '" + a.config + "' not found");
    config = sr::parse_pipeline_config(sr::read_text_file(a.config));
  }
  // Explicit flags override the config file.
  auto given = [&](const char* flag) { return cmd.count(flag) > 0; };
  if (given("--seed")) config.seed = c.seed;
  if (given("--folds")) config.folds = c.folds;
  if (given("--imaging-folds")) config.imaging_folds = a.imaging_folds;
  if (given("--top-k")) config.top_k_cognitive = c.top_k;
  if (given("--imaging-top-k")) config.top_k_imaging = a.imaging_top_k;
  if (given("--lambda-rule")) config.lambda_rule = sr::parse_lambda_rule(c.lambda_rule);
  if (given("--epsilon")) config.epsilon = c.epsilon;
  if (given("--keep")) config.sis_keep = c.keep;
  if (given("--threads")) config.threads = c.threads;
  if (a.no_partition_check) config.check_partition_counts = false;
  if (a.skip_low_dim) config.low_dim = false;
  if (a.skip_cognitive) config.cognitive = false;
  if (a.skip_disease) config.disease = false;
  if (a.skip_imaging) config.imaging = false;
  if (config.folds < 2 || config.imaging_folds < 2) throw sr::ConfigError("fold counts must be at least 2");
  if (!(config.epsilon > 0.0 && config.epsilon < 0.5)) throw sr::ConfigError("--epsilon must be in (0, 0.5)");

  const sr::Dataset d = load(c);
  sr::RegionPartition partition;
  if (config.imaging) {
    if (a.partition.empty()) throw sr::ConfigError("missing FA block: --partition is required for the imaging stage");
    if (!std::filesystem::exists(a.partition))
      throw sr::ConfigError("missing FA block: partition file '" + a.partition + "' not found");
    partition = sr::load_partition(a.partition, config.check_partition_counts ? &sr::kDefaultRegionCounts : nullptr);
  }
  const sr::PipelineReport report = sr::run_pipeline_to(d, partition, config, c.out);
  std::cout << "wrote " << report.tree.files().size() + 1 << " files to " << c.out << "\n";
  return kOk;
}

struct SummarizeArgs {
  Common common;
  std::string stratum = "DX";
  std::string columns;
};

int summarize(const SummarizeArgs& a) {
  const sr::Dataset d = load(a.common);
  const auto summary = sr::summarize_cohort(d, a.stratum, split(a.columns, ','));
  const std::string tsv = sr::cohort_summary_tsv(summary);
  if (a.common.out.empty()) {
    std::cout << tsv;
  } else {
    sr::ReportTree tree;
    tree.add("cohort_summary.tsv", tsv);
    commit(tree, a.common.out);
  }
  return kOk;
}

void add_data_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--input", c.input, "Input CSV (header row required; NA or empty = missing)");
  cmd->add_option("--schema", c.schema, "Schema JSON mapping columns to roles");
  cmd->add_option("--out", c.out, "Output directory (written atomically)");
  cmd->add_option("--threads", c.threads, "Worker threads for folds and kernels (0 = runtime default)")
      ->capture_default_str();
}

void add_model_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--outcome", c.outcome, "Outcome column (comma list for multi-response models)");
  cmd->add_option("--predictors", c.predictors,
                  "Comma list of predictors; a trailing '*' matches a prefix (default: all predictors)");
  cmd->add_option("--seed", c.seed, "Seed for fold assignment")->capture_default_str();
  cmd->add_option("--folds", c.folds, "Cross-validation folds")->capture_default_str();
  cmd->add_option("--lambda-rule", c.lambda_rule, "Lambda selection: min or 1se")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsereg: sparse regression toolkit for cohort genetics and imaging data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sparsereg 0.1.0");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic cohort with planted effects");
  sim_cmd->add_option("--out", sim.out, "Output directory");
  sim_cmd->add_option("--config", sim.config, "Generator spec JSON (spec_version 1)");
  sim_cmd->add_option("--seed", sim.seed, "Generator seed")->capture_default_str();
  sim_cmd->add_flag("--null", sim.null_effects, "Zero every planted effect");

  auto* fit_cmd = app.add_subcommand("fit", "Fit one model and write its tables");
  fit_cmd->require_subcommand(1);
  Common fc;
  struct Model {
    const char* name;
    const char* help;
    int (*run)(const Common&);
  };
  const Model models[] = {
      {"ols", "Linear regression with t-based inference", fit_ols},
      {"ordinal", "Proportional-odds regression (slopes use logit P(Y<=j) = theta_j - x'b)", fit_ordinal},
      {"lasso", "Cross-validated l1 regression; top-k defaults to 75", fit_lasso},
      {"multinomial", "Cross-validated l1 multinomial regression", fit_multinomial},
      {"multitask", "Cross-validated row-group lasso over several responses; top-k defaults to 50",
       fit_multitask},
      {"sis", "Marginal correlation screening (keep defaults to ceil(n / ln n))", fit_sis},
  };
  std::vector<std::pair<CLI::App*, const Model*>> model_cmds;
  for (const Model& m : models) {
    auto* cmd = fit_cmd->add_subcommand(m.name, m.help);
    add_data_flags(cmd, fc);
    add_model_flags(cmd, fc);
    const std::string name = m.name;
    if (name == "ols") cmd->add_option("--dummy", fc.dummies, "Indicator coding column:reference (repeatable)");
    if (name == "ordinal" || name == "multinomial")
      cmd->add_option("--levels", fc.levels, "Ordered category labels, comma separated");
    if (name == "ordinal")
      cmd->add_option("--ci-level", fc.ci_level, "Confidence level for the forest table")->capture_default_str();
    if (name == "lasso" || name == "multinomial" || name == "multitask")
      cmd->add_flag("--no-standardize", fc.raw_scale, "Penalize coefficients on the raw predictor scale");
    if (name == "lasso" || name == "multitask")
      cmd->add_option("--top-k", fc.top_k, "Rows in the ranked report (0 = model default)");
    if (name == "multitask") {
      cmd->add_flag("--logit", fc.logit, "Logit-transform responses in [0, 1] before fitting");
      cmd->add_option("--epsilon", fc.epsilon, "Clamp for the logit transform")->capture_default_str();
    }
    if (name == "sis") cmd->add_option("--keep", fc.keep, "Predictors to keep (0 = ceil(n / ln n))");
    model_cmds.emplace_back(cmd, &m);
  }

  PipelineArgs pa;
  pa.common.top_k = 75;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run the staged analysis and write a report tree");
  add_data_flags(pipe_cmd, pa.common);
  pipe_cmd->add_option("--partition", pa.partition, "Region partition CSV (response_name,region)");
  pipe_cmd->add_option("--config", pa.config, "Pipeline config JSON (spec_version 1); flags override it");
  pipe_cmd->add_option("--seed", pa.common.seed, "Run seed; every stage derives its folds from it")
      ->capture_default_str();
  pipe_cmd->add_option("--folds", pa.common.folds, "CV folds for the cognitive and disease stages")
      ->capture_default_str();
  pipe_cmd->add_option("--imaging-folds", pa.imaging_folds, "CV folds for the imaging stage")
      ->capture_default_str();
  pipe_cmd->add_option("--top-k", pa.common.top_k, "Genes reported per cognitive outcome")
      ->capture_default_str();
  pipe_cmd->add_option("--imaging-top-k", pa.imaging_top_k, "Genes reported per brain region")
      ->capture_default_str();
  pipe_cmd->add_option("--lambda-rule", pa.common.lambda_rule, "Lambda selection: min or 1se")
      ->capture_default_str();
  pipe_cmd->add_option("--epsilon", pa.common.epsilon, "Clamp for the FA logit transform")
      ->capture_default_str();
  pipe_cmd->add_option("--keep", pa.common.keep, "Screening size (0 = ceil(n / ln n))");
  pipe_cmd->add_flag("--no-partition-check", pa.no_partition_check,
                     "Accept region counts other than 23/11/23");
  pipe_cmd->add_flag("--skip-low-dim", pa.skip_low_dim, "Disable the clinical regressions");
  pipe_cmd->add_flag("--skip-cognitive", pa.skip_cognitive, "Disable the cognitive stage");
  pipe_cmd->add_flag("--skip-disease", pa.skip_disease, "Disable the disease stage");
  pipe_cmd->add_flag("--skip-imaging", pa.skip_imaging, "Disable the imaging stage");

  SummarizeArgs sa;
  auto* sum_cmd = app.add_subcommand("summarize", "Per-stratum cohort characteristics");
  add_data_flags(sum_cmd, sa.common);
  sum_cmd->add_option("--stratum", sa.stratum, "Stratum column")->capture_default_str();
  sum_cmd->add_option("--columns", sa.columns, "Comma list of columns (default: all non-id)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageFailure;
  }

  try {
    int threads = 0;
    if (*pipe_cmd) threads = pa.common.threads;
    else if (*sum_cmd) threads = sa.common.threads;
    else if (*fit_cmd) threads = fc.threads;
    if (threads < 0) throw sr::ConfigError("--threads must be nonnegative");
    if (threads > 0) sr::kernels::set_threads(threads);

    if (*sim_cmd) return simulate(sim);
    if (*pipe_cmd) return pipeline(pa, *pipe_cmd);
    if (*sum_cmd) return summarize(sa);
    for (const auto& [cmd, model] : model_cmds)
      if (*cmd) return model->run(fc);
    return kUsageFailure;
  } catch (const sr::StageError& e) {
    report_error(e.what());
    return e.is_usage() ? kUsageFailure : kModelFailure;
  } catch (const sr::ModelError& e) {
    report_error(e.what());
    return kModelFailure;
  } catch (const sr::Error& e) {
    report_error(e.what());
    return kUsageFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(e.what());
    return kUsageFailure;
  } catch (const std::exception& e) {
    report_error(std::string("internal: ") + e.what());
    return kModelFailure;
  }
}
