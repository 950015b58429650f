#include "sparsereg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <json.hpp>

#include "sparsereg/error.hpp"

namespace sparsereg {

namespace {

using Json = nlohmann::ordered_json;
using Rng = std::mt19937_64;

// Clinical block: name, location, spread. APOE4 is a 0/1 carrier flag.
struct ClinicalVar {
  const char* name;
  double mean;
  double sd;
};
constexpr ClinicalVar kClinical[] = {
    {"AGE", 73.0, 7.0},     {"PTEDUCAT", 16.0, 2.7}, {"APOE4", 0.4, 0.0},
    {"ABETA", 1000.0, 400}, {"TAU", 290.0, 120.0},   {"PTAU", 28.0, 13.0},
    {"RAVLT", 35.0, 12.0},
};
constexpr double kTauPtauCorrelation = 0.99;

std::string clin_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "CLIN_%02zu", index + 1);
  return buf;
}

std::vector<std::string> clinical_names(const CohortSpec& spec) {
  std::vector<std::string> names;
  for (const auto& c : kClinical) names.emplace_back(c.name);
  for (std::size_t k = 0; k < spec.p_clinical; ++k) names.push_back(clin_name(k));
  return names;
}

std::size_t gene_index(const std::string& name, std::size_t p_genes) {
  if (name.size() != 9 || name.rfind("GENE", 0) != 0) return p_genes;
  std::size_t idx = 0;
  for (std::size_t k = 4; k < 9; ++k) {
    if (name[k] < '0' || name[k] > '9') return p_genes;
    idx = idx * 10 + static_cast<std::size_t>(name[k] - '0');
  }
  return idx >= 1 && idx <= p_genes ? idx - 1 : p_genes;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_effects(const EffectMap& genes, const CohortSpec& spec, const std::string& where) {
  for (const auto& [name, value] : genes) {
    if (gene_index(name, spec.p_genes) >= spec.p_genes)
      throw ConfigError("cohort spec: " + where + " names unknown gene '" + name + "'");
    if (!std::isfinite(value)) throw ConfigError("cohort spec: " + where + " effect is not finite");
  }
}

std::vector<std::string> nonzero_keys(const EffectMap& m) {
  std::vector<std::string> out;
  for (const auto& [k, v] : m)
    if (v != 0.0) out.push_back(k);
  return out;
}

std::vector<std::string> intersect(const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// JSON readers that name the offending key.
std::size_t read_count(const Json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("cohort spec: '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

double read_real(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("cohort spec: '" + key + "' must be a number");
  return v.get<double>();
}

EffectMap read_effects(const Json& v, const std::string& key) {
  if (!v.is_object()) throw ConfigError("cohort spec: '" + key + "' must be an object");
  EffectMap out;
  for (auto& [name, value] : v.items()) out[name] = read_real(value, key + "." + name);
  return out;
}

OutcomeEffects read_outcome(const Json& v, const std::string& key) {
  if (!v.is_object()) throw ConfigError("cohort spec: '" + key + "' must be an object");
  OutcomeEffects out;
  for (auto& [name, value] : v.items()) {
    if (name == "genes") out.genes = read_effects(value, key + ".genes");
    else if (name == "clinical") out.clinical = read_effects(value, key + ".clinical");
    else if (name == "stage") {
      if (!value.is_array()) throw ConfigError("cohort spec: '" + key + ".stage' must be an array");
      for (const auto& s : value) out.stage.push_back(read_real(s, key + ".stage"));
    } else {
      throw ConfigError("cohort spec: unknown key '" + key + "." + name + "'");
    }
  }
  return out;
}

Json outcome_json(const OutcomeEffects& e) {
  Json j;
  j["genes"] = e.genes;
  j["clinical"] = e.clinical;
  j["stage"] = e.stage;
  return j;
}

}  // namespace

std::string gene_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "GENE%05zu", index + 1);
  return buf;
}

std::string fa_name(Region region, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "FA_%s_%02zu", std::string(region_code(region)).c_str(), index + 1);
  return buf;
}

CohortSpec default_cohort_spec() {
  CohortSpec s;
  // Cross-outcome genes move MMSE and CDRSB in opposite directions, matching
  // the sign convention of the two scores.
  s.mmse.genes = {{"GENE00001", 0.7}, {"GENE00002", -0.7}, {"GENE00003", 0.6},
                  {"GENE00004", -0.6}, {"GENE00005", 0.6}, {"GENE00006", -0.6}};
  s.mmse.clinical = {{"AGE", -0.4}, {"PTEDUCAT", 0.4}, {"APOE4", -0.3}, {"RAVLT", 0.6}};
  s.mmse.stage = {0.0, -0.5, -1.0, -2.0};

  s.cdrsb.genes = {{"GENE00001", -0.7}, {"GENE00002", 0.7}, {"GENE00003", -0.6},
                   {"GENE00004", 0.6}, {"GENE00007", 0.6}, {"GENE00008", -0.6}};
  s.cdrsb.clinical = {{"AGE", 0.3}, {"RAVLT", -0.4}};
  s.cdrsb.stage = {0.0, 0.5, 1.0, 2.0};

  s.disease.genes = {{"GENE00009", 0.8}, {"GENE00010", -0.8}, {"GENE00011", 0.8}};
  s.disease.clinical = {{"APOE4", 0.6}, {"ABETA", -0.5}, {"TAU", 0.5}, {"AGE", 0.3}};

  const EffectMap hemisphere = {{"GENE00012", 0.25}, {"GENE00013", -0.25},
                                {"GENE00014", 0.25}, {"GENE00015", -0.25}};
  s.fa[Region::left_hemisphere] = hemisphere;
  s.fa[Region::right_hemisphere] = hemisphere;
  s.fa[Region::corpus_callosum] = {{"GENE00012", 0.25}, {"GENE00013", -0.25}};
  return s;
}

CohortSpec null_cohort_spec() {
  CohortSpec s = default_cohort_spec();
  for (OutcomeEffects* e : {&s.mmse, &s.cdrsb, &s.disease}) {
    for (auto& [k, v] : e->genes) v = 0.0;
    for (auto& [k, v] : e->clinical) v = 0.0;
    for (auto& v : e->stage) v = 0.0;
  }
  for (auto& [r, m] : s.fa)
    for (auto& [k, v] : m) v = 0.0;
  return s;
}

CohortSpec parse_cohort_spec(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cohort spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("spec_version"))
    throw ConfigError("cohort spec: missing key 'spec_version'");
  if (j["spec_version"] != 1) throw ConfigError("cohort spec: unsupported 'spec_version'");
  CohortSpec s = default_cohort_spec();
  for (auto& [key, v] : j.items()) {
    if (key == "spec_version") continue;
    if (key == "n") s.n = read_count(v, key);
    else if (key == "n_genetic") s.n_genetic = read_count(v, key);
    else if (key == "n_imaging") s.n_imaging = read_count(v, key);
    else if (key == "p_clinical") s.p_clinical = read_count(v, key);
    else if (key == "p_genes") s.p_genes = read_count(v, key);
    else if (key == "noise_sd") s.noise_sd = read_real(v, key);
    else if (key == "disease_labels") {
      if (!v.is_array()) throw ConfigError("cohort spec: 'disease_labels' must be an array");
      s.disease_labels.clear();
      for (const auto& l : v) {
        if (!l.is_string()) throw ConfigError("cohort spec: 'disease_labels' must hold strings");
        s.disease_labels.push_back(l.get<std::string>());
      }
    } else if (key == "group_sizes") {
      if (!v.is_array()) throw ConfigError("cohort spec: 'group_sizes' must be an array");
      s.group_sizes.clear();
      for (const auto& g : v) s.group_sizes.push_back(read_count(g, key));
    } else if (key == "ordinal_thresholds") {
      if (!v.is_array()) throw ConfigError("cohort spec: 'ordinal_thresholds' must be an array");
      s.ordinal_thresholds.clear();
      for (const auto& t : v) s.ordinal_thresholds.push_back(read_real(t, key));
    } else if (key == "fa_block") {
      if (!v.is_boolean()) throw ConfigError("cohort spec: 'fa_block' must be a boolean");
      s.fa_block = v.get<bool>();
    } else if (key == "fa_counts") {
      if (!v.is_array()) throw ConfigError("cohort spec: 'fa_counts' must be an array");
      s.fa_counts.clear();
      for (const auto& c : v) s.fa_counts.push_back(read_count(c, key));
    } else if (key == "fa_noise_sd") s.fa_noise_sd = read_real(v, key);
    else if (key == "fa_shared_sd") s.fa_shared_sd = read_real(v, key);
    else if (key == "mmse") s.mmse = read_outcome(v, key);
    else if (key == "cdrsb") s.cdrsb = read_outcome(v, key);
    else if (key == "disease") s.disease = read_outcome(v, key);
    else if (key == "fa") {
      if (!v.is_object()) throw ConfigError("cohort spec: 'fa' must be an object");
      s.fa.clear();
      for (auto& [code, effects] : v.items()) {
        Region r;
        try {
          r = parse_region(code);
        } catch (const Error&) {
          throw ConfigError("cohort spec: unknown region 'fa." + code + "'");
        }
        s.fa[r] = read_effects(effects, "fa." + code);
      }
    } else {
      throw ConfigError("cohort spec: unknown key '" + key + "'");
    }
  }
  validate(s);
  return s;
}

std::string cohort_spec_json(const CohortSpec& spec) {
  Json j;
  j["spec_version"] = 1;
  j["n"] = spec.n;
  j["n_genetic"] = spec.n_genetic;
  j["n_imaging"] = spec.n_imaging;
  j["p_clinical"] = spec.p_clinical;
  j["p_genes"] = spec.p_genes;
  j["noise_sd"] = spec.noise_sd;
  j["disease_labels"] = spec.disease_labels;
  j["group_sizes"] = spec.group_sizes;
  j["ordinal_thresholds"] = spec.ordinal_thresholds;
  j["fa_block"] = spec.fa_block;
  j["fa_counts"] = spec.fa_counts;
  j["fa_noise_sd"] = spec.fa_noise_sd;
  j["fa_shared_sd"] = spec.fa_shared_sd;
  j["mmse"] = outcome_json(spec.mmse);
  j["cdrsb"] = outcome_json(spec.cdrsb);
  j["disease"] = outcome_json(spec.disease);
  Json fa = Json::object();
  for (Region r : kRegions) {
    auto it = spec.fa.find(r);
    if (it != spec.fa.end()) fa[std::string(region_code(r))] = it->second;
  }
  j["fa"] = fa;
  return j.dump(2) + "\n";
}

void validate(const CohortSpec& spec) {
  if (spec.n < 1) throw ConfigError("cohort spec: 'n' must be at least 1");
  if (spec.n_genetic > spec.n) throw ConfigError("cohort spec: 'n_genetic' exceeds 'n'");
  if (spec.n_imaging > spec.n_genetic)
    throw ConfigError("cohort spec: 'n_imaging' exceeds 'n_genetic'");
  if (!(spec.noise_sd >= 0.0) || !(spec.fa_noise_sd >= 0.0) || !(spec.fa_shared_sd >= 0.0))
    throw ConfigError("cohort spec: noise sds must be nonnegative");
  const std::size_t J = spec.disease_labels.size();
  if (J < 2) throw ConfigError("cohort spec: 'disease_labels' needs at least 2 labels");
  if (std::set<std::string>(spec.disease_labels.begin(), spec.disease_labels.end()).size() != J)
    throw ConfigError("cohort spec: 'disease_labels' must be distinct");
  if (!spec.group_sizes.empty()) {
    if (spec.group_sizes.size() != J)
      throw ConfigError("cohort spec: 'group_sizes' must have one entry per disease label");
    if (std::accumulate(spec.group_sizes.begin(), spec.group_sizes.end(), std::size_t{0}) != spec.n)
      throw ConfigError("cohort spec: 'group_sizes' must sum to 'n'");
  } else {
    if (spec.ordinal_thresholds.size() != J - 1)
      throw ConfigError("cohort spec: 'ordinal_thresholds' must have one fewer entry than labels");
  }
  for (std::size_t k = 1; k < spec.ordinal_thresholds.size(); ++k)
    if (!(spec.ordinal_thresholds[k] > spec.ordinal_thresholds[k - 1]))
      throw ConfigError("cohort spec: 'ordinal_thresholds' must be strictly increasing");
  if (spec.fa_counts.size() != 3) throw ConfigError("cohort spec: 'fa_counts' needs 3 entries");

  const auto clinical = clinical_names(spec);
  const std::set<std::string> known(clinical.begin(), clinical.end());
  const std::pair<const OutcomeEffects*, const char*> outcomes[] = {
      {&spec.mmse, "mmse"}, {&spec.cdrsb, "cdrsb"}, {&spec.disease, "disease"}};
  for (const auto& [e, key] : outcomes) {
    check_effects(e->genes, spec, std::string(key) + ".genes");
    for (const auto& [name, v] : e->clinical)
      if (!known.count(name))
        throw ConfigError("cohort spec: " + std::string(key) + ".clinical names unknown column '" +
                          name + "'");
    if (!e->stage.empty() && e->stage.size() != J)
      throw ConfigError("cohort spec: " + std::string(key) +
                        ".stage must have one entry per disease label");
  }
  for (const auto& [r, effects] : spec.fa)
    check_effects(effects, spec, "fa." + std::string(region_code(r)));
}

GroundTruth ground_truth(const CohortSpec& spec) {
  GroundTruth t;
  t.mmse_genes = nonzero_keys(spec.mmse.genes);
  t.cdrsb_genes = nonzero_keys(spec.cdrsb.genes);
  t.cross_outcome_genes = intersect(t.mmse_genes, t.cdrsb_genes);
  t.disease_genes = nonzero_keys(spec.disease.genes);
  if (spec.fa_block) {
    for (Region r : kRegions) {
      auto it = spec.fa.find(r);
      t.region_genes[r] = it == spec.fa.end() ? std::vector<std::string>{} : nonzero_keys(it->second);
    }
    const auto& lb = t.region_genes[Region::left_hemisphere];
    const auto& cc = t.region_genes[Region::corpus_callosum];
    const auto& rb = t.region_genes[Region::right_hemisphere];
    t.all_region_genes = intersect(intersect(lb, rb), cc);
    for (const auto& g : intersect(lb, rb))
      if (!std::binary_search(cc.begin(), cc.end(), g)) t.hemisphere_only_genes.push_back(g);
  }
  return t;
}

std::string ground_truth_json(const GroundTruth& truth, const CohortSpec& spec) {
  Json j;
  j["mmse_genes"] = truth.mmse_genes;
  j["cdrsb_genes"] = truth.cdrsb_genes;
  j["cross_outcome_genes"] = truth.cross_outcome_genes;
  j["disease_genes"] = truth.disease_genes;
  j["all_region_genes"] = truth.all_region_genes;
  j["hemisphere_only_genes"] = truth.hemisphere_only_genes;
  Json regions = Json::object();
  for (const auto& [r, genes] : truth.region_genes) regions[std::string(region_code(r))] = genes;
  j["region_genes"] = regions;
  j["spec"] = Json::parse(cohort_spec_json(spec));
  return j.dump(2) + "\n";
}

SimulatedCohort simulate_cohort(const CohortSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::uniform_01<double> uniform;
  const std::size_t n = spec.n;
  const std::size_t J = spec.disease_labels.size();
  auto draw = [&](std::size_t count) {
    std::vector<double> v(count);
    for (auto& x : v) x = normal(rng);
    return v;
  };

  // Latent standardized clinical scores; observed columns are affine maps
  // (APOE4 is a thresholded draw).
  const auto clinical = clinical_names(spec);
  std::map<std::string, std::vector<double>> z;
  for (const auto& name : clinical) z[name] = draw(n);
  {
    auto& tau = z["TAU"];
    auto& ptau = z["PTAU"];
    const double c = kTauPtauCorrelation;
    for (std::size_t i = 0; i < n; ++i) ptau[i] = c * tau[i] + std::sqrt(1.0 - c * c) * ptau[i];
  }
  std::vector<double> apoe(n);
  {
    boost::random::bernoulli_distribution<double> carrier(0.4);
    const double sd = std::sqrt(0.4 * 0.6);
    for (std::size_t i = 0; i < n; ++i) {
      apoe[i] = carrier(rng) ? 1.0 : 0.0;
      z["APOE4"][i] = (apoe[i] - 0.4) / sd;
    }
  }

  std::vector<std::vector<double>> genes(spec.p_genes);
  for (auto& g : genes) g = draw(n);

  auto linear = [&](const OutcomeEffects& e, std::size_t i) {
    double eta = 0.0;
    for (const auto& [name, b] : e.clinical) eta += b * z.at(name)[i];
    for (const auto& [name, b] : e.genes) eta += b * genes[gene_index(name, spec.p_genes)][i];
    return eta;
  };

  // Disease stage from the latent liability.
  std::vector<int> stage(n, 0);
  {
    std::vector<double> liability(n);
    for (std::size_t i = 0; i < n; ++i) liability[i] = linear(spec.disease, i);
    if (!spec.group_sizes.empty()) {
      for (std::size_t i = 0; i < n; ++i) liability[i] += spec.noise_sd * normal(rng);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return liability[a] < liability[b]; });
      std::size_t pos = 0;
      for (std::size_t k = 0; k < J; ++k)
        for (std::size_t c = 0; c < spec.group_sizes[k]; ++c) stage[order[pos++]] = static_cast<int>(k);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double u = std::clamp(uniform(rng), 1e-12, 1.0 - 1e-12);
        const double v = liability[i] + std::log(u / (1.0 - u));
        int k = 0;
        for (double t : spec.ordinal_thresholds)
          if (v > t) ++k;
        stage[i] = k;
      }
    }
  }

  auto outcome = [&](const OutcomeEffects& e, double base) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = base + linear(e, i) + spec.noise_sd * normal(rng);
      if (!e.stage.empty()) y[i] += e.stage[static_cast<std::size_t>(stage[i])];
    }
    return y;
  };
  const auto mmse = outcome(spec.mmse, 27.0);
  const auto cdrsb = outcome(spec.cdrsb, 1.5);

  std::vector<Column> cols;
  auto numeric = [&](std::string name, Role role, std::vector<double> values, std::size_t present) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.values = std::move(values);
    c.missing.assign(n, 0);
    for (std::size_t i = present; i < n; ++i) {
      c.values[i] = std::nan("");
      c.missing[i] = 1;
    }
    cols.push_back(std::move(c));
  };
  auto text = [&](std::string name, Role role, std::vector<std::string> labels) {
    Column c;
    c.name = std::move(name);
    c.role = role;
    c.values.assign(n, std::nan(""));
    c.missing.assign(n, 1);
    c.text = std::move(labels);
    cols.push_back(std::move(c));
  };

  {
    std::vector<std::string> ids(n), dx(n);
    char buf[32];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "S%05zu", i + 1);
      ids[i] = buf;
      dx[i] = spec.disease_labels[static_cast<std::size_t>(stage[i])];
    }
    text("PTID", Role::id, std::move(ids));
    text("DX", Role::outcome, std::move(dx));
  }
  numeric("MMSE", Role::outcome, mmse, n);
  numeric("CDRSB", Role::outcome, cdrsb, n);
  for (const auto& c : kClinical) {
    std::vector<double> v(n);
    const std::string name = c.name;
    if (name == "APOE4") v = apoe;
    else if (name == "PTEDUCAT")
      for (std::size_t i = 0; i < n; ++i)
        v[i] = std::clamp(std::round(c.mean + c.sd * z[name][i]), 6.0, 20.0);
    else
      for (std::size_t i = 0; i < n; ++i) v[i] = c.mean + c.sd * z[name][i];
    numeric(name, Role::predictor, std::move(v), n);
  }
  for (std::size_t k = 0; k < spec.p_clinical; ++k)
    numeric(clin_name(k), Role::predictor, z[clin_name(k)], n);
  // FA responses are built before the gene columns give up their storage.
  SimulatedCohort out;
  std::vector<std::pair<std::string, std::vector<double>>> fa_columns;
  if (spec.fa_block) {
    const std::vector<double> shared = draw(n);
    for (std::size_t r = 0; r < 3; ++r) {
      const Region region = kRegions[r];
      auto it = spec.fa.find(region);
      const EffectMap none;
      const EffectMap& effects = it == spec.fa.end() ? none : it->second;
      for (std::size_t c = 0; c < spec.fa_counts[r]; ++c) {
        const double base = std::log(0.45 / 0.55) + 0.3 * (uniform(rng) - 0.5);
        std::vector<double> v(n, std::nan(""));
        for (std::size_t i = 0; i < spec.n_imaging; ++i) {
          double eta = base + spec.fa_shared_sd * shared[i] + spec.fa_noise_sd * normal(rng);
          for (const auto& [name, b] : effects) eta += b * genes[gene_index(name, spec.p_genes)][i];
          v[i] = logistic(eta);
        }
        const std::string name = fa_name(region, c);
        out.partition.entries.emplace_back(name, region);
        fa_columns.emplace_back(name, std::move(v));
      }
    }
  }

  for (std::size_t g = 0; g < spec.p_genes; ++g)
    numeric(gene_name(g), Role::predictor, std::move(genes[g]), spec.n_genetic);
  for (auto& [name, v] : fa_columns) numeric(name, Role::outcome, std::move(v), spec.n_imaging);

  out.data = Dataset(std::move(cols));
  out.truth = ground_truth(spec);
  return out;
}

Schema simulated_schema(const CohortSpec& spec) {
  Schema s;
  s.default_role = Role::predictor;
  s.roles["PTID"] = Role::id;
  s.roles["DX"] = Role::outcome;
  s.roles["MMSE"] = Role::outcome;
  s.roles["CDRSB"] = Role::outcome;
  if (spec.fa_block)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < spec.fa_counts[r]; ++c) s.roles[fa_name(kRegions[r], c)] = Role::outcome;
  return s;
}

std::string simulated_schema_json(const CohortSpec& spec) {
  const Schema s = simulated_schema(spec);
  Json j;
  j["spec_version"] = 1;
  j["default_role"] = std::string(role_name(s.default_role));
  Json roles = Json::object();
  for (const auto& [name, role] : s.roles) roles[name] = std::string(role_name(role));
  j["roles"] = roles;
  return j.dump(2) + "\n";
}

}  // namespace sparsereg
