#include "sparsereg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sparsereg/error.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_text(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::optional<double> parse_number(std::string_view cell) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

// Splits RFC-4180 text into records. Quoted fields may contain separators,
// doubled quotes, and line breaks.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else if (c == '\n') {
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string quote_csv(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return kNaN;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::outcome: return "outcome";
    case Role::predictor: return "predictor";
    case Role::id: return "id";
    case Role::stratum: return "stratum";
  }
  return "predictor";
}

Role parse_role(std::string_view text) {
  if (text == "outcome") return Role::outcome;
  if (text == "predictor") return Role::predictor;
  if (text == "id") return Role::id;
  if (text == "stratum") return Role::stratum;
  throw ConfigError("unknown column role '" + std::string(text) + "'");
}

Dataset::Dataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  n_rows_ = columns_.empty() ? 0 : columns_.front().values.size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    Column& c = columns_[j];
    if (c.values.size() != n_rows_)
      throw DataError("column '" + c.name + "' has " + std::to_string(c.values.size()) +
                      " rows, expected " + std::to_string(n_rows_));
    if (c.missing.empty()) {
      c.missing.resize(n_rows_);
      for (std::size_t i = 0; i < n_rows_; ++i) c.missing[i] = std::isnan(c.values[i]) ? 1 : 0;
    }
    if (c.missing.size() != n_rows_) throw DataError("column '" + c.name + "': bad missing mask");
    if (!c.text.empty() && c.text.size() != n_rows_)
      throw DataError("column '" + c.name + "': bad text length");
    if (!index_.emplace(c.name, j).second) throw DataError("duplicate column name '" + c.name + "'");
  }
}

bool Dataset::has(std::string_view name) const { return index_.find(name) != index_.end(); }

std::size_t Dataset::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DataError("no column named '" + std::string(name) + "'");
  return it->second;
}

const Column& Dataset::column(std::string_view name) const { return columns_[index_of(name)]; }

std::vector<std::string> Dataset::names_with_role(Role role) const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (c.role == role) out.push_back(c.name);
  return out;
}

std::vector<std::string> Dataset::names_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& c : columns_)
    if (c.name.rfind(prefix, 0) == 0) out.push_back(c.name);
  return out;
}

Matrix Dataset::matrix(const std::vector<std::string>& names) const {
  Matrix X(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const Column& c = column(names[j]);
    if (c.role == Role::id) throw DataError("id column '" + c.name + "' used as numeric");
    for (std::size_t i = 0; i < n_rows_; ++i) {
      if (c.missing[i])
        throw DataError("missing value in column '" + c.name + "' row " + std::to_string(i + 1));
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c.values[i];
    }
  }
  return X;
}

Vector Dataset::vector(std::string_view name) const { return matrix({std::string(name)}).col(0); }

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  std::vector<Column> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column s{c.name, c.role, {}, {}, {}};
    s.values.reserve(rows.size());
    s.missing.reserve(rows.size());
    for (std::size_t r : rows) {
      s.values.push_back(c.values.at(r));
      s.missing.push_back(c.missing.at(r));
      if (!c.text.empty()) s.text.push_back(c.text[r]);
    }
    out.push_back(std::move(s));
  }
  Dataset d(std::move(out));
  d.n_rows_ = rows.size();
  return d;
}

Dataset Dataset::with_column(Column column) const {
  std::vector<Column> out = columns_;
  out.push_back(std::move(column));
  return Dataset(std::move(out));
}

Schema parse_schema_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("spec_version"))
    throw ConfigError("schema: missing key 'spec_version'");
  if (j["spec_version"] != 1) throw ConfigError("schema: unsupported 'spec_version'");
  Schema schema;
  for (auto& [key, value] : j.items()) {
    if (key == "spec_version") continue;
    if (key == "roles") {
      if (!value.is_object()) throw ConfigError("schema: 'roles' must be an object");
      for (auto& [name, role] : value.items()) {
        if (!role.is_string()) throw ConfigError("schema: role of '" + name + "' must be a string");
        schema.roles[name] = parse_role(role.get<std::string>());
      }
    } else if (key == "default_role") {
      if (!value.is_string()) throw ConfigError("schema: 'default_role' must be a string");
      schema.default_role = parse_role(value.get<std::string>());
    } else {
      throw ConfigError("schema: unknown key '" + key + "'");
    }
  }
  return schema;
}

Schema load_schema(const std::string& path) { return parse_schema_json(read_text_file(path)); }

Dataset parse_csv(std::string_view text, const Schema& schema) {
  auto records = split_records(text);
  if (records.empty()) throw DataError("csv: empty file");
  const auto& header = records.front();
  std::set<std::string> seen;
  for (const auto& h : header)
    if (!seen.insert(h).second) throw DataError("csv: duplicate header name '" + h + "'");
  for (const auto& [name, role] : schema.roles)
    if (!seen.count(name)) throw DataError("schema references absent column '" + name + "'");

  const std::size_t n = records.size() - 1;
  std::vector<Column> columns(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    auto it = schema.roles.find(header[j]);
    columns[j].name = header[j];
    columns[j].role = it == schema.roles.end() ? schema.default_role : it->second;
    columns[j].values.assign(n, kNaN);
    columns[j].missing.assign(n, 1);
    columns[j].text.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    if (rec.size() != header.size())
      throw DataError("csv: row " + std::to_string(i + 2) + " has " + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(header.size()));
    for (std::size_t j = 0; j < header.size(); ++j) {
      Column& c = columns[j];
      c.text[i] = rec[j];
      if (is_missing_text(rec[j])) continue;
      if (c.role == Role::id) {
        c.missing[i] = 0;
        continue;
      }
      if (auto v = parse_number(rec[j])) {
        c.values[i] = *v;
        c.missing[i] = 0;
      } else if (c.role == Role::stratum || c.role == Role::outcome) {
        // Categorical text: usable through `text`, missing as a number.
        c.missing[i] = 1;
      }
    }
  }
  return Dataset(std::move(columns));
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

std::string to_csv(const Dataset& d) {
  std::string out;
  for (std::size_t j = 0; j < d.n_cols(); ++j) {
    if (j) out += ',';
    out += quote_csv(d.columns()[j].name);
  }
  out += '\n';
  char buf[64];
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
      const Column& c = d.columns()[j];
      if (j) out += ',';
      if (!c.text.empty() && (c.missing[i] || c.role == Role::id)) {
        out += quote_csv(is_missing_text(c.text[i]) ? std::string("NA") : c.text[i]);
      } else if (c.missing[i]) {
        out += "NA";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", c.values[i]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& d, const std::string& path) { write_text_file(path, to_csv(d)); }

Dataset drop_incomplete(const Dataset& d, const std::vector<std::string>& required) {
  std::vector<const Column*> cols;
  for (const auto& name : required) cols.push_back(&d.column(name));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    bool ok = true;
    for (const Column* c : cols) {
      const bool categorical = c->role == Role::stratum || c->role == Role::outcome;
      const bool text_ok = categorical && !c->text.empty() && !is_missing_text(c->text[i]);
      if (c->missing[i] && !text_ok) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(i);
  }
  if (keep.size() == d.n_rows()) return d;
  return d.select_rows(keep);
}

const ColumnScale& StandardizationInfo::at(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw DataError("no standardization entry for '" + std::string(name) + "'");
}

std::pair<Dataset, StandardizationInfo> standardize(const Dataset& d,
                                                    const std::vector<std::string>& columns) {
  std::vector<Column> out = d.columns();
  StandardizationInfo info;
  for (const auto& name : columns) {
    Column& c = out[d.index_of(name)];
    std::vector<double> present;
    for (std::size_t i = 0; i < c.values.size(); ++i)
      if (!c.missing[i]) present.push_back(c.values[i]);
    ColumnScale scale{name, 0.0, 1.0, false};
    if (!present.empty()) scale.mean = sample_mean(present);
    const double sd = present.size() >= 2 ? sample_sd(present, scale.mean) : 0.0;
    if (sd > 1e-12 * (std::abs(scale.mean) + 1.0)) {
      scale.sd = sd;
      scale.was_standardized = true;
      for (std::size_t i = 0; i < c.values.size(); ++i)
        if (!c.missing[i]) c.values[i] = (c.values[i] - scale.mean) / sd;
      c.text.clear();
    }
    info.columns.push_back(scale);
  }
  return {Dataset(std::move(out)), std::move(info)};
}

Dataset invert_standardization(const Dataset& d, const StandardizationInfo& info) {
  std::vector<Column> out = d.columns();
  for (const auto& s : info.columns) {
    if (!s.was_standardized) continue;
    Column& c = out[d.index_of(s.name)];
    for (std::size_t i = 0; i < c.values.size(); ++i)
      if (!c.missing[i]) c.values[i] = c.values[i] * s.sd + s.mean;
  }
  return Dataset(std::move(out));
}

CategoricalOutcome categorical_outcome(const Dataset& d, std::string_view column,
                                       const std::vector<std::string>& levels) {
  const Column& c = d.column(column);
  auto cell = [&](std::size_t i) -> std::string {
    if (!c.text.empty()) return c.text[i];
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", c.values[i]);
    return buf;
  };
  CategoricalOutcome out;
  out.labels = levels;
  const bool discover = levels.empty();
  out.codes.resize(d.n_rows());
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    const std::string v = cell(i);
    if (is_missing_text(v) || (c.text.empty() && c.missing[i]))
      throw DataError("categorical column '" + c.name + "' has a missing value at row " +
                      std::to_string(i + 1));
    auto it = std::find(out.labels.begin(), out.labels.end(), v);
    if (it == out.labels.end()) {
      if (!discover)
        throw DataError("column '" + c.name + "': level '" + v + "' not among declared levels");
      out.labels.push_back(v);
      it = out.labels.end() - 1;
    }
    out.codes[i] = static_cast<int>(it - out.labels.begin());
  }
  return out;
}

Dataset expand_dummies(const Dataset& d, std::string_view column,
                       const std::vector<std::string>& levels, std::string_view reference) {
  if (std::find(levels.begin(), levels.end(), reference) == levels.end())
    throw ConfigError("reference level '" + std::string(reference) + "' is not a level of '" +
                      std::string(column) + "'");
  const CategoricalOutcome cat = categorical_outcome(d, column, levels);
  std::vector<Column> out = d.columns();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l] == reference) continue;
    Column dummy{std::string(column) + "_" + levels[l], Role::predictor, {}, {}, {}};
    dummy.values.resize(d.n_rows());
    dummy.missing.assign(d.n_rows(), 0);
    for (std::size_t i = 0; i < d.n_rows(); ++i)
      dummy.values[i] = cat.codes[i] == static_cast<int>(l) ? 1.0 : 0.0;
    out.push_back(std::move(dummy));
  }
  return Dataset(std::move(out));
}

std::vector<std::size_t> FoldAssignment::train_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_id.size(); ++i)
    if (fold_id[i] != fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldAssignment::test_rows(int fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_id.size(); ++i)
    if (fold_id[i] == fold) rows.push_back(i);
  return rows;
}

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > n)
    throw ConfigError("fold count " + std::to_string(k) + " exceeds row count " +
                      std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldAssignment folds{std::vector<int>(n), k, seed};
  for (std::size_t pos = 0; pos < n; ++pos)
    folds.fold_id[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return folds;
}

CohortSummary summarize_cohort(const Dataset& d, std::string_view stratum,
                               const std::vector<std::string>& columns) {
  if (!d.has(stratum)) throw DataError("stratum column '" + std::string(stratum) + "' is absent");
  const CategoricalOutcome groups = categorical_outcome(d, stratum);
  const std::size_t g = groups.labels.size();

  std::vector<std::string> names = columns;
  if (names.empty())
    for (const auto& c : d.columns())
      if (c.role != Role::id && c.name != stratum) names.push_back(c.name);

  CohortSummary out;
  out.strata = groups.labels;
  StratumSummary count{"N", "count", std::vector<double>(g, 0.0)};
  for (int code : groups.codes) count.values[code] += 1.0;
  out.rows.push_back(count);

  for (const auto& name : names) {
    const Column& c = d.column(name);
    bool numeric = c.role != Role::stratum;
    if (numeric && !c.text.empty())
      for (std::size_t i = 0; i < d.n_rows() && numeric; ++i)
        if (c.missing[i] && !is_missing_text(c.text[i])) numeric = false;
    if (numeric) {
      StratumSummary mean{name, "mean", std::vector<double>(g)};
      StratumSummary sd{name, "sd", std::vector<double>(g)};
      for (std::size_t s = 0; s < g; ++s) {
        std::vector<double> v;
        for (std::size_t i = 0; i < d.n_rows(); ++i)
          if (groups.codes[i] == static_cast<int>(s) && !c.missing[i]) v.push_back(c.values[i]);
        mean.values[s] = v.empty() ? kNaN : sample_mean(v);
        sd.values[s] = v.empty() ? kNaN : sample_sd(v, mean.values[s]);
      }
      out.rows.push_back(std::move(mean));
      out.rows.push_back(std::move(sd));
    } else {
      std::vector<std::string> levels;
      for (std::size_t i = 0; i < d.n_rows(); ++i) {
        const std::string& v = c.text[i];
        if (!is_missing_text(v) && std::find(levels.begin(), levels.end(), v) == levels.end())
          levels.push_back(v);
      }
      std::vector<double> present(g, 0.0);
      std::vector<std::vector<double>> counts(levels.size(), std::vector<double>(g, 0.0));
      for (std::size_t i = 0; i < d.n_rows(); ++i) {
        if (is_missing_text(c.text[i])) continue;
        const auto l = std::find(levels.begin(), levels.end(), c.text[i]) - levels.begin();
        counts[l][groups.codes[i]] += 1.0;
        present[groups.codes[i]] += 1.0;
      }
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const std::string var = name + "=" + levels[l];
        StratumSummary pct{var, "percent", std::vector<double>(g)};
        for (std::size_t s = 0; s < g; ++s)
          pct.values[s] = present[s] > 0 ? 100.0 * counts[l][s] / present[s] : kNaN;
        out.rows.push_back({var, "count", counts[l]});
        out.rows.push_back(std::move(pct));
      }
    }
  }
  return out;
}

std::string cohort_summary_tsv(const CohortSummary& summary) {
  std::string out = "variable\tstatistic";
  for (const auto& s : summary.strata) out += "\t" + s;
  out += '\n';
  for (const auto& row : summary.rows) {
    out += row.variable + "\t" + row.statistic;
    for (double v : row.values) out += "\t" + format_number(v);
    out += '\n';
  }
  return out;
}

}  // namespace sparsereg
