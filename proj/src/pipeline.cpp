#include "sparsereg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>

#include <json.hpp>

#include "sparsereg/kernels.hpp"

namespace sparsereg {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix(seed ^ mix(h));
}

// Runs a stage body and relabels library errors with the stage name.
template <typename F>
auto labeled(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const ModelError& e) {
    throw StageError(stage, e.what(), false);
  } catch (const Error& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(stage, e.what(), true);
  }
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::set<std::string> names_of(const std::vector<WeightedTerm>& rows) {
  std::set<std::string> out;
  for (const auto& r : rows) out.insert(r.name);
  return out;
}

std::set<std::string> set_and(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

std::string pair_label(const LevelPair& p) { return p.first + "_vs_" + p.second; }

std::string cv_lambda_tsv(const CvResult& cv) {
  std::string out = "lambda\tcv_mean\tcv_se\n";
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l)
    out += format_number(cv.lambdas[l]) + "\t" + format_number(cv.cv_mean[l]) + "\t" +
           format_number(cv.cv_se[l]) + "\n";
  return out;
}

std::string filter_tsv(const CorrelationFilterResult& f) {
  std::string out = "predictor\tstatus\tpartner\n";
  for (const auto& r : f.retained) {
    const bool constant = std::find(f.constant.begin(), f.constant.end(), r) != f.constant.end();
    out += r + "\t" + (constant ? "retained_constant" : "retained") + "\t\n";
  }
  for (const auto& [dropped, kept] : f.dropped) out += dropped + "\tdropped\t" + kept + "\n";
  return out;
}

std::string threshold_tsv(const OrdinalFit& fit) {
  std::string out = "threshold\testimate\tstd_error\n";
  for (Eigen::Index j = 0; j < fit.thresholds.size(); ++j)
    out += fit.labels[static_cast<std::size_t>(j)] + "|" +
           fit.labels[static_cast<std::size_t>(j) + 1] + "\t" + format_number(fit.thresholds[j]) +
           "\t" + format_number(fit.threshold_std_errors[j]) + "\n";
  return out;
}

std::string selection_json(const CvResult& cv, LambdaRule rule, double lambda,
                           std::size_t n_rows, std::size_t n_screened) {
  Json j;
  j["rows"] = n_rows;
  j["screened"] = n_screened;
  j["folds"] = cv.n_folds;
  j["lambda_rule"] = std::string(lambda_rule_name(rule));
  j["lambda"] = lambda;
  j["lambda_min"] = cv.lambda_min;
  j["lambda_1se"] = cv.lambda_1se;
  j["lambda_max"] = cv.path.lambda_max;
  return j.dump(2) + "\n";
}

void require_columns(const Dataset& d, const std::vector<std::string>& cols,
                     const std::string& what) {
  for (const auto& c : cols)
    if (!d.has(c)) throw DataError("missing " + what + ": column '" + c + "' is absent");
}

Matrix logit_matrix(const Matrix& M, double epsilon) {
  Matrix out(M.rows(), M.cols());
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const double v = M(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("FA value outside [0, 1]: " + format_number(v));
      out(i, j) = logit_transform(v, epsilon);
    }
  return out;
}

std::vector<std::size_t> column_positions(const std::vector<std::string>& all,
                                          const std::vector<std::string>& wanted) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t k = 0; k < all.size(); ++k) pos[all[k]] = k;
  std::vector<std::size_t> out;
  for (const auto& w : wanted) out.push_back(pos.at(w));
  return out;
}

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Vector take_rows(const Vector& v, const std::vector<std::size_t>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(rows[r])];
  return out;
}

// Genes kept by the pairwise screens, merged per config, in gene order.
std::vector<std::string> merge_screens(const std::map<LevelPair, ScreenResult>& screens,
                                       const std::vector<std::string>& genes, MergeRule rule) {
  std::set<std::string> merged;
  bool first = true;
  for (const auto& [pair, screen] : screens) {
    const std::set<std::string> kept(screen.kept.begin(), screen.kept.end());
    if (rule == MergeRule::union_of_pairs || first) merged.insert(kept.begin(), kept.end());
    else merged = set_and(merged, kept);
    first = false;
  }
  std::vector<std::string> out;
  for (const auto& g : genes)
    if (merged.count(g)) out.push_back(g);
  return out;
}

Matrix take_columns(const Matrix& X, const std::vector<std::size_t>& cols) {
  Matrix out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

}  // namespace

double logit_transform(double v, double epsilon) {
  const double c = std::min(std::max(v, epsilon), 1.0 - epsilon);
  return std::log(c / (1.0 - c));
}

std::vector<std::string> gene_columns(const Dataset& d, const PipelineConfig& config) {
  if (!config.gene_columns.empty()) {
    require_columns(d, config.gene_columns, "gene block");
    return config.gene_columns;
  }
  std::vector<std::string> out;
  for (const auto& name : d.names_with_prefix(config.gene_prefix))
    if (d.column(name).role == Role::predictor) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------- config

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("pipeline config: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("spec_version"))
    throw ConfigError("pipeline config: missing key 'spec_version'");
  if (j["spec_version"] != 1) throw ConfigError("pipeline config: unsupported 'spec_version'");
  PipelineConfig c;
  auto fail = [](const std::string& key, const char* what) {
    throw ConfigError("pipeline config: '" + key + "' must be " + what);
  };
  auto boolean = [&](const Json& v, const std::string& key) {
    if (!v.is_boolean()) fail(key, "a boolean");
    return v.get<bool>();
  };
  auto count = [&](const Json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "a nonnegative integer");
    return v.get<std::size_t>();
  };
  auto real = [&](const Json& v, const std::string& key) {
    if (!v.is_number()) fail(key, "a number");
    return v.get<double>();
  };
  auto text = [&](const Json& v, const std::string& key) {
    if (!v.is_string()) fail(key, "a string");
    return v.get<std::string>();
  };
  auto strings = [&](const Json& v, const std::string& key) {
    if (!v.is_array()) fail(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) fail(key, "an array of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  for (auto& [key, v] : j.items()) {
    if (key == "spec_version") continue;
    if (key == "seed") c.seed = count(v, key);
    else if (key == "low_dim") c.low_dim = boolean(v, key);
    else if (key == "cognitive") c.cognitive = boolean(v, key);
    else if (key == "disease") c.disease = boolean(v, key);
    else if (key == "imaging") c.imaging = boolean(v, key);
    else if (key == "cognitive_outcomes") c.cognitive_outcomes = strings(v, key);
    else if (key == "disease_column") c.disease_column = text(v, key);
    else if (key == "disease_levels") c.disease_levels = strings(v, key);
    else if (key == "gene_prefix") c.gene_prefix = text(v, key);
    else if (key == "gene_columns") c.gene_columns = strings(v, key);
    else if (key == "clinical_predictors") c.clinical_predictors = strings(v, key);
    else if (key == "ordinal_predictors") c.ordinal_predictors = strings(v, key);
    else if (key == "stage_reference") c.stage_reference = text(v, key);
    else if (key == "correlation_threshold") c.correlation_threshold = real(v, key);
    else if (key == "significance") c.significance = real(v, key);
    else if (key == "ci_level") c.ci_level = real(v, key);
    else if (key == "folds") c.folds = static_cast<int>(count(v, key));
    else if (key == "imaging_folds") c.imaging_folds = static_cast<int>(count(v, key));
    else if (key == "top_k_cognitive") c.top_k_cognitive = count(v, key);
    else if (key == "top_k_imaging") c.top_k_imaging = count(v, key);
    else if (key == "sis_keep") c.sis_keep = count(v, key);
    else if (key == "lambda_rule") c.lambda_rule = parse_lambda_rule(text(v, key));
    else if (key == "epsilon") c.epsilon = real(v, key);
    else if (key == "merge") {
      const auto m = text(v, key);
      if (m == "union") c.merge = MergeRule::union_of_pairs;
      else if (m == "intersection") c.merge = MergeRule::intersection_of_pairs;
      else fail(key, "'union' or 'intersection'");
    } else if (key == "per_region_screening") c.per_region_screening = boolean(v, key);
    else if (key == "screen_within_folds") c.screen_within_folds = boolean(v, key);
    else if (key == "standardize_predictors") c.standardize_predictors = boolean(v, key);
    else if (key == "standardize_responses") c.standardize_responses = boolean(v, key);
    else if (key == "check_partition_counts") c.check_partition_counts = boolean(v, key);
    else if (key == "threads") c.threads = static_cast<int>(count(v, key));
    else throw ConfigError("pipeline config: unknown key '" + key + "'");
  }
  if (!(c.epsilon > 0.0 && c.epsilon < 0.5)) fail("epsilon", "in (0, 0.5)");
  if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) fail("ci_level", "in (0, 1)");
  if (!(c.significance > 0.0 && c.significance < 1.0)) fail("significance", "in (0, 1)");
  if (!(c.correlation_threshold > 0.0 && c.correlation_threshold <= 1.0))
    fail("correlation_threshold", "in (0, 1]");
  if (c.folds < 2) fail("folds", "at least 2");
  if (c.imaging_folds < 2) fail("imaging_folds", "at least 2");
  if (c.top_k_cognitive < 1) fail("top_k_cognitive", "at least 1");
  if (c.top_k_imaging < 1) fail("top_k_imaging", "at least 1");
  return c;
}

std::string pipeline_config_json(const PipelineConfig& c) {
  Json j;
  j["spec_version"] = 1;
  j["seed"] = c.seed;
  j["low_dim"] = c.low_dim;
  j["cognitive"] = c.cognitive;
  j["disease"] = c.disease;
  j["imaging"] = c.imaging;
  j["cognitive_outcomes"] = c.cognitive_outcomes;
  j["disease_column"] = c.disease_column;
  j["disease_levels"] = c.disease_levels;
  j["gene_prefix"] = c.gene_prefix;
  j["gene_columns"] = c.gene_columns;
  j["clinical_predictors"] = c.clinical_predictors;
  j["ordinal_predictors"] = c.ordinal_predictors;
  j["stage_reference"] = c.stage_reference;
  j["correlation_threshold"] = c.correlation_threshold;
  j["significance"] = c.significance;
  j["ci_level"] = c.ci_level;
  j["folds"] = c.folds;
  j["imaging_folds"] = c.imaging_folds;
  j["top_k_cognitive"] = c.top_k_cognitive;
  j["top_k_imaging"] = c.top_k_imaging;
  j["sis_keep"] = c.sis_keep;
  j["lambda_rule"] = std::string(lambda_rule_name(c.lambda_rule));
  j["epsilon"] = c.epsilon;
  j["merge"] = c.merge == MergeRule::union_of_pairs ? "union" : "intersection";
  j["per_region_screening"] = c.per_region_screening;
  j["screen_within_folds"] = c.screen_within_folds;
  j["standardize_predictors"] = c.standardize_predictors;
  j["standardize_responses"] = c.standardize_responses;
  j["check_partition_counts"] = c.check_partition_counts;
  // threads is deliberately absent: it never changes results.
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- stages

LowDimReport run_low_dim_stage(const Dataset& d, const PipelineConfig& config, ReportTree* tree) {
  return labeled("low_dim", [&] {
    LowDimReport r;
    require_columns(d, {config.disease_column}, "disease column");
    require_columns(d, config.cognitive_outcomes, "cognitive outcome");
    require_columns(d, config.clinical_predictors, "clinical predictor");
    require_columns(d, config.ordinal_predictors, "ordinal predictor");

    r.summary = summarize_cohort(
        d, config.disease_column, concat(config.cognitive_outcomes, config.clinical_predictors));

    const Dataset complete = drop_incomplete(
        d, concat(concat(config.cognitive_outcomes, config.clinical_predictors),
                  {config.disease_column}));
    r.filter = correlation_filter(complete, config.clinical_predictors,
                                  config.correlation_threshold);

    const Dataset with_stage = expand_dummies(complete, config.disease_column,
                                              config.disease_levels, config.stage_reference);
    std::vector<std::string> terms = r.filter.retained;
    for (const auto& level : config.disease_levels)
      if (level != config.stage_reference) terms.push_back(config.disease_column + "_" + level);
    for (const auto& outcome : config.cognitive_outcomes)
      r.ols[outcome] = fit_ols(with_stage, outcome, terms);

    const Dataset ord_rows = drop_incomplete(d, concat(config.ordinal_predictors, {config.disease_column}));
    const CategoricalOutcome stage =
        categorical_outcome(ord_rows, config.disease_column, config.disease_levels);
    r.ordinal = fit_ordinal(ord_rows, stage, config.ordinal_predictors);

    if (tree) {
      tree->add("low_dim/cohort_summary.tsv", cohort_summary_tsv(r.summary));
      tree->add("low_dim/correlation_filter.tsv", filter_tsv(r.filter));
      for (const auto& [outcome, fit] : r.ols) tree->add("low_dim/ols_" + outcome + ".tsv", ols_tsv(fit));
      tree->add("low_dim/ordinal_forest.tsv", forest_tsv(forest_data(r.ordinal, config.ci_level)));
      tree->add("low_dim/ordinal_thresholds.tsv", threshold_tsv(r.ordinal));
      Json j;
      j["ols_rows"] = complete.n_rows();
      j["ordinal_rows"] = ord_rows.n_rows();
      j["significance"] = config.significance;
      Json sig = Json::object();
      for (const auto& [outcome, fit] : r.ols) {
        std::vector<std::string> names;
        for (std::size_t k = 1; k < fit.terms.size(); ++k)
          if (fit.p_values[static_cast<Eigen::Index>(k)] < config.significance)
            names.push_back(fit.terms[k]);
        sig[outcome] = names;
      }
      std::vector<std::string> ord_sig;
      for (const auto& row : forest_data(r.ordinal, config.ci_level))
        if (row.p_value < config.significance) ord_sig.push_back(row.term);
      sig[config.disease_column] = ord_sig;
      j["significant_terms"] = sig;
      j["ordinal_iterations"] = r.ordinal.iterations;
      j["ordinal_log_likelihood"] = r.ordinal.log_likelihood;
      tree->add("low_dim/summary.json", j.dump(2));
    }
    return r;
  });
}

CognitiveReport run_cognitive_stage(const Dataset& d, const PipelineConfig& config,
                                    ReportTree* tree) {
  return labeled("cognitive", [&] {
    CognitiveReport r;
    const auto genes = gene_columns(d, config);
    if (genes.empty()) throw DataError("missing gene block: no columns match '" + config.gene_prefix + "'");
    require_columns(d, config.cognitive_outcomes, "cognitive outcome");
    const std::uint64_t seed = stage_seed(config.seed, "cognitive");
    bool first = true;
    for (const auto& outcome : config.cognitive_outcomes) {
      const Dataset rows = drop_incomplete(d, concat(genes, {outcome}));
      const std::size_t n = rows.n_rows();
      if (n < 3) throw DataError("outcome '" + outcome + "' has fewer than 3 complete rows");
      const Matrix X = rows.matrix(genes);
      const Vector y = rows.vector(outcome);
      OutcomeSelection sel;
      sel.screen = sis_screen(X, y, genes, config.sis_keep ? config.sis_keep : default_screen_size(n));
      const Matrix Xk = take_columns(X, column_positions(genes, sel.screen.kept));
      const FoldAssignment folds = make_folds(n, config.folds, seed);
      FoldScreen refold;
      if (config.screen_within_folds) {
        refold.candidates = &X;
        refold.select = [&](const std::vector<std::size_t>& train) {
          const auto s = sis_screen(take_rows(X, train), take_rows(y, train), genes, sel.screen.d);
          return column_positions(genes, s.kept);
        };
      }
      PathConfig path_config;
      path_config.standardize = config.standardize_predictors;
      sel.cv = cv_lasso(Xk, y, sel.screen.kept, folds, path_config, refold);
      sel.lambda = sel.cv.selected(config.lambda_rule);
      sel.top = nonzero_report(sel.cv.path, sel.lambda, config.top_k_cognitive);
      for (const auto& t : nonzero_report(sel.cv.path, sel.lambda, sel.screen.kept.size()))
        sel.selected.insert(t.name);

      const std::set<std::string> top = names_of(sel.top);
      r.intersection = first ? top : set_and(r.intersection, top);
      first = false;
      if (tree) {
        const std::string base = "cognitive/" + outcome;
        tree->add(base + "_screen.tsv", screen_tsv(sel.screen));
        tree->add(base + "_cv.tsv", cv_lambda_tsv(sel.cv));
        tree->add(base + "_selection.json",
                  selection_json(sel.cv, config.lambda_rule, sel.lambda, n, sel.screen.kept.size()));
        tree->add(base + "_top.tsv", nonzero_report_tsv(sel.top));
      }
      r.outcomes[outcome] = std::move(sel);
    }
    if (tree) tree->add("cognitive/intersection.txt", name_list(r.intersection));
    return r;
  });
}

DiseaseReport run_disease_stage(const Dataset& d, const PipelineConfig& config, ReportTree* tree) {
  return labeled("disease", [&] {
    DiseaseReport r;
    const auto genes = gene_columns(d, config);
    if (genes.empty()) throw DataError("missing gene block: no columns match '" + config.gene_prefix + "'");
    require_columns(d, {config.disease_column}, "disease column");
    const Dataset rows = drop_incomplete(d, concat(genes, {config.disease_column}));
    const CategoricalOutcome outcome =
        categorical_outcome(rows, config.disease_column, config.disease_levels);
    const Matrix X = rows.matrix(genes);

    r.screens = pairwise_screens(X, outcome, genes, config.sis_keep);
    r.screened = merge_screens(r.screens, genes, config.merge);
    if (r.screened.empty())
      throw ModelError("pairwise screening produced an empty gene set");

    const Matrix Xs = take_columns(X, column_positions(genes, r.screened));
    const FoldAssignment folds = make_folds(rows.n_rows(), config.folds,
                                            stage_seed(config.seed, "disease"));
    FoldScreen refold;
    if (config.screen_within_folds) {
      refold.candidates = &X;
      refold.select = [&](const std::vector<std::size_t>& train) {
        CategoricalOutcome sub{outcome.labels, {}};
        for (std::size_t i : train) sub.codes.push_back(outcome.codes[i]);
        const auto screens = pairwise_screens(take_rows(X, train), sub, genes, config.sis_keep);
        return column_positions(genes, merge_screens(screens, genes, config.merge));
      };
    }
    PathConfig path_config;
    path_config.standardize = config.standardize_predictors;
    r.cv = cv_multinomial(Xs, outcome, r.screened, folds, path_config, refold);
    const std::size_t idx = r.cv.selected_index(config.lambda_rule);
    r.fit = multinomial_fit_at(r.cv.path, idx, Xs, outcome.codes);
    r.pair_sets = pairwise_active(r.fit);
    std::vector<std::set<std::string>> sets;
    for (const auto& [pair, s] : r.pair_sets) sets.push_back(s);
    r.sets = gene_sets(sets);

    if (tree) {
      for (const auto& [pair, screen] : r.screens)
        tree->add("disease/screen_" + pair_label(pair) + ".tsv", screen_tsv(screen));
      tree->add("disease/screened.txt",
                name_list(std::set<std::string>(r.screened.begin(), r.screened.end())));
      tree->add("disease/cv.tsv", cv_lambda_tsv(r.cv));
      tree->add("disease/selection.json",
                selection_json(r.cv, config.lambda_rule, r.cv.selected(config.lambda_rule),
                               rows.n_rows(), r.screened.size()));
      tree->add("disease/fit.json", multinomial_fit_json(r.fit));
      for (const auto& [pair, s] : r.pair_sets)
        tree->add("disease/active_" + pair_label(pair) + ".txt", name_list(s));
      tree->add("disease/union.txt", name_list(r.sets.union_set));
      tree->add("disease/intersection.txt", name_list(r.sets.intersection));
    }
    return r;
  });
}

ImagingReport run_imaging_stage(const Dataset& d, const RegionPartition& partition,
                                const PipelineConfig& config, ReportTree* tree) {
  return labeled("imaging", [&] {
    ImagingReport r;
    if (partition.entries.empty()) throw DataError("missing FA block: the region partition is empty");
    if (config.check_partition_counts && partition.counts() != kDefaultRegionCounts)
      throw DataError("region partition counts do not match 23/11/23");
    std::vector<std::string> responses;
    for (const auto& [name, region] : partition.entries) responses.push_back(name);
    require_columns(d, responses, "FA block");
    const auto genes = gene_columns(d, config);
    if (genes.empty()) throw DataError("missing gene block: no columns match '" + config.gene_prefix + "'");

    const Dataset rows = drop_incomplete(d, concat(genes, responses));
    const std::size_t n = rows.n_rows();
    if (n < static_cast<std::size_t>(config.imaging_folds))
      throw DataError("only " + std::to_string(n) + " rows carry both genes and FA responses");
    const Matrix X = rows.matrix(genes);
    const FoldAssignment folds = make_folds(n, config.imaging_folds,
                                            stage_seed(config.seed, "imaging"));
    const std::size_t d_keep = config.sis_keep ? config.sis_keep : default_screen_size(n);

    std::optional<ScreenResult> shared;
    Matrix all_responses;
    if (!config.per_region_screening) {
      all_responses = logit_matrix(rows.matrix(responses), config.epsilon);
      shared = sis_screen_multi(X, all_responses, genes, d_keep);
    }

    PathConfig path_config;
    path_config.standardize = config.standardize_predictors;
    path_config.standardize_responses = config.standardize_responses;
    for (Region region : kRegions) {
      const std::string code(region_code(region));
      const auto cols = partition.columns(region);
      if (cols.empty()) continue;
      try {
        const Matrix Y = logit_matrix(rows.matrix(cols), config.epsilon);
        RegionResult res;
        res.screen = shared ? *shared : sis_screen_multi(X, Y, genes, d_keep);
        const Matrix Xk = take_columns(X, column_positions(genes, res.screen.kept));
        FoldScreen refold;
        if (config.screen_within_folds) {
          refold.candidates = &X;
          refold.select = [&](const std::vector<std::size_t>& train) {
            const Matrix Yt = take_rows(shared ? all_responses : Y, train);
            return column_positions(genes, sis_screen_multi(take_rows(X, train), Yt, genes, d_keep).kept);
          };
        }
        res.cv = cv_multitask(Xk, Y, res.screen.kept, cols, folds, path_config, refold);
        res.fit = multitask_fit_at(res.cv.path, res.cv.selected_index(config.lambda_rule));
        res.top = rank_rows(res.fit, config.top_k_imaging);
        if (tree) {
          const std::string base = "imaging/" + code;
          tree->add(base + "_screen.tsv", screen_tsv(res.screen));
          tree->add(base + "_cv.tsv", cv_lambda_tsv(res.cv));
          tree->add(base + "_selection.json",
                    selection_json(res.cv, config.lambda_rule, res.fit.lambda, n,
                                   res.screen.kept.size()));
          tree->add(base + "_top.tsv", nonzero_report_tsv(res.top));
        }
        r.regions[region] = std::move(res);
      } catch (const ModelError& e) {
        throw ModelError("region " + code + ": " + e.what());
      } catch (const Error& e) {
        throw DataError("region " + code + ": " + e.what());
      }
    }

    // Pairwise and three-way intersections of the region top-k sets.
    std::vector<Region> present;
    for (const auto& [region, res] : r.regions) present.push_back(region);
    const std::size_t m = present.size();
    for (std::size_t mask = 1; mask < (1u << m); ++mask) {
      if (__builtin_popcountll(mask) < 2) continue;
      std::string key;
      std::set<std::string> acc;
      bool first = true;
      for (std::size_t k = 0; k < m; ++k) {
        if (!(mask & (1u << k))) continue;
        key += (key.empty() ? "" : "_") + std::string(region_code(present[k]));
        const auto top = names_of(r.regions.at(present[k]).top);
        acc = first ? top : set_and(acc, top);
        first = false;
      }
      r.intersections[key] = acc;
    }
    if (tree)
      for (const auto& [key, names] : r.intersections)
        tree->add("imaging/intersection_" + key + ".txt", name_list(names));
    return r;
  });
}

// ---------------------------------------------------------------- driver

PipelineReport run_full_pipeline(const Dataset& d, const RegionPartition& partition,
                                 const PipelineConfig& config) {
  if (config.threads > 0) kernels::set_threads(config.threads);
  PipelineReport report;
  ReportTree& tree = report.tree;
  const std::string config_text = pipeline_config_json(config);
  tree.add("config.json", config_text);

  if (config.low_dim) report.low_dim = run_low_dim_stage(d, config, &tree);
  if (config.cognitive) report.cognitive = run_cognitive_stage(d, config, &tree);
  if (config.disease) report.disease = run_disease_stage(d, config, &tree);
  if (config.imaging) report.imaging = run_imaging_stage(d, partition, config, &tree);

  // Cross-stage overlaps between the gene selections.
  std::map<std::string, std::set<std::string>> stage_sets;
  if (report.cognitive) stage_sets["cognitive"] = report.cognitive->intersection;
  if (report.disease) stage_sets["disease"] = report.disease->sets.union_set;
  if (report.imaging) {
    std::set<std::string> any;
    for (const auto& [region, res] : report.imaging->regions) {
      const auto top = names_of(res.top);
      any.insert(top.begin(), top.end());
    }
    stage_sets["imaging"] = any;
  }
  for (auto a = stage_sets.begin(); a != stage_sets.end(); ++a)
    for (auto b = std::next(a); b != stage_sets.end(); ++b)
      tree.add("cross_stage/" + a->first + "_" + b->first + ".txt",
               name_list(set_and(a->second, b->second)));

  Json meta;
  meta["tool"] = "sparsereg";
  meta["version"] = kVersion;
  meta["seed"] = config.seed;
  meta["config_sha256"] = sha256_hex(config_text);
  meta["rows"] = d.n_rows();
  Json seeds = Json::object();
  for (const char* stage : {"cognitive", "disease", "imaging"}) seeds[stage] = stage_seed(config.seed, stage);
  meta["stage_seeds"] = seeds;
  Json lambdas = Json::object();
  if (report.cognitive)
    for (const auto& [outcome, sel] : report.cognitive->outcomes) lambdas["cognitive/" + outcome] = sel.lambda;
  if (report.disease) lambdas["disease"] = report.disease->fit.lambda;
  if (report.imaging)
    for (const auto& [region, res] : report.imaging->regions)
      lambdas["imaging/" + std::string(region_code(region))] = res.fit.lambda;
  meta["lambdas"] = lambdas;
  meta["lambda_rule"] = std::string(lambda_rule_name(config.lambda_rule));
  std::vector<std::string> stages;
  if (report.low_dim) stages.emplace_back("low_dim");
  if (report.cognitive) stages.emplace_back("cognitive");
  if (report.disease) stages.emplace_back("disease");
  if (report.imaging) stages.emplace_back("imaging");
  meta["stages"] = stages;
  tree.add("metadata.json", meta.dump(2));
  return report;
}

PipelineReport run_pipeline_to(const Dataset& d, const RegionPartition& partition,
                               const PipelineConfig& config, const std::filesystem::path& out) {
  PipelineReport report = run_full_pipeline(d, partition, config);
  report.tree.commit(out);
  return report;
}

}  // namespace sparsereg
