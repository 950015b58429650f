#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

/// Ordinary least squares with classical inference. Index 0 is the intercept.
struct OlsFit {
  std::vector<std::string> terms;  // "(Intercept)", predictors...
  Vector coefficients;
  Vector std_errors;
  Vector t_values;
  Vector p_values;
  std::size_t n = 0;
  std::size_t residual_df = 0;
  double sigma = 0.0;  // residual standard error
  double r_squared = 0.0;
  double adjusted_r_squared = 0.0;
  Vector residuals;
};

/// Fits y on [1, X] through a column-pivoted QR. Throws RankDeficientError
/// naming the dependent columns, or DataError when n <= p + 1.
OlsFit fit_ols(const Matrix& X, const Vector& y, const std::vector<std::string>& names);
OlsFit fit_ols(const Dataset& d, std::string_view outcome,
               const std::vector<std::string>& predictors);

/// Term table: term, estimate, std_error, t_value, p_value.
std::string ols_tsv(const OlsFit& fit);

struct CorrelationFilterResult {
  std::vector<std::string> retained;
  std::vector<std::pair<std::string, std::string>> dropped;  // (dropped, kept partner)
  std::vector<std::string> constant;                        // flagged, retained
};

/// Greedy scan in column order: a column is dropped when its |r| with an
/// already retained column exceeds `threshold`.
CorrelationFilterResult correlation_filter(const Dataset& d,
                                           const std::vector<std::string>& predictors,
                                           double threshold);

/// Normal-approximation interval estimate +/- z_{(1+level)/2} * std_error.
std::pair<double, double> wald_ci(double estimate, double std_error, double level);

double normal_quantile(double p);
double normal_two_sided_p(double z);
double t_two_sided_p(double t, double df);

}  // namespace sparsereg
