#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsereg/types.hpp"

namespace sparsereg {

enum class Role { outcome, predictor, id, stratum };

std::string_view role_name(Role role);
Role parse_role(std::string_view text);

struct Column {
  std::string name;
  Role role = Role::predictor;
  std::vector<double> values;      // NaN where missing
  std::vector<std::uint8_t> missing;
  std::vector<std::string> text;   // raw cell text, kept for categorical use
};

/// Column-typed table. Immutable once built: every transformation returns a
/// new Dataset.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Column> columns);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  bool has(std::string_view name) const;
  const Column& column(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  /// Names of all columns with the given role, in column order.
  std::vector<std::string> names_with_role(Role role) const;
  /// Names matching a prefix, in column order.
  std::vector<std::string> names_with_prefix(std::string_view prefix) const;

  /// Dense n x k matrix of the named columns. Throws DataError if any used
  /// cell is missing or a column has role id.
  Matrix matrix(const std::vector<std::string>& names) const;
  Vector vector(std::string_view name) const;

  Dataset select_rows(const std::vector<std::size_t>& rows) const;
  Dataset with_column(Column column) const;

 private:
  std::size_t n_rows_ = 0;
  std::vector<Column> columns_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Role mapping applied during ingestion. Columns absent from `roles` get
/// `default_role`.
struct Schema {
  std::map<std::string, Role, std::less<>> roles;
  Role default_role = Role::predictor;
};

Schema parse_schema_json(const std::string& json_text);
Schema load_schema(const std::string& path);

/// Missing sentinels are "NA" and the empty cell.
Dataset parse_csv(std::string_view text, const Schema& schema);
Dataset load_csv(const std::string& path, const Schema& schema);
void write_csv(const Dataset& d, const std::string& path);
std::string to_csv(const Dataset& d);

/// Listwise deletion on the required columns; order preserved.
Dataset drop_incomplete(const Dataset& d, const std::vector<std::string>& required);

struct ColumnScale {
  std::string name;
  double mean = 0.0;
  double sd = 1.0;
  bool was_standardized = false;  // false for constant columns
};

struct StandardizationInfo {
  std::vector<ColumnScale> columns;
  const ColumnScale& at(std::string_view name) const;
};

/// Centers and scales to unit sample sd (n - 1 denominator). Constant columns
/// are flagged and left untouched.
std::pair<Dataset, StandardizationInfo> standardize(const Dataset& d,
                                                    const std::vector<std::string>& columns);
Dataset invert_standardization(const Dataset& d, const StandardizationInfo& info);

struct CategoricalOutcome {
  std::vector<std::string> labels;  // ordered
  std::vector<int> codes;           // 0..J-1 per row
  int n_levels() const { return static_cast<int>(labels.size()); }
};

/// Builds a categorical outcome from the raw text of `column`. When `levels`
/// is empty, levels are the distinct values in order of first appearance.
CategoricalOutcome categorical_outcome(const Dataset& d, std::string_view column,
                                       const std::vector<std::string>& levels = {});

/// Adds 0/1 indicator columns `<column>_<level>` for every level except
/// `reference`. The reference category must be named explicitly.
Dataset expand_dummies(const Dataset& d, std::string_view column,
                       const std::vector<std::string>& levels, std::string_view reference);

struct FoldAssignment {
  std::vector<int> fold_id;
  int k = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> train_rows(int fold) const;
  std::vector<std::size_t> test_rows(int fold) const;
};

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

struct StratumSummary {
  std::string variable;
  std::string statistic;        // count | mean | sd | percent
  std::vector<double> values;   // one per stratum
};

struct CohortSummary {
  std::vector<std::string> strata;
  std::vector<StratumSummary> rows;
};

/// Per-stratum count, mean and sd for numeric columns; count and percent per
/// level for categorical (stratum-role or non-numeric) columns. Missing cells
/// are skipped.
CohortSummary summarize_cohort(const Dataset& d, std::string_view stratum,
                               const std::vector<std::string>& columns = {});
std::string cohort_summary_tsv(const CohortSummary& summary);

}  // namespace sparsereg
