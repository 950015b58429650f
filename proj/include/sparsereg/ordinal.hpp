#pragma once

#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

// Proportional-odds (cumulative logit) model with the subtraction convention
//   logit P(Y <= j | x) = theta_j - x'beta,   j = 0..J-2,
// so a positive slope moves mass toward higher (worse) categories.

struct OrdinalOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  double loglik_tolerance = 1e-10;  // relative change
  double separation_norm = 1e3;
  // A converged slope whose log odds ratio per predictor sd exceeds this is
  // the likelihood saturating under separation, not an estimate.
  double separation_slope = 20.0;
};

struct OrdinalFit {
  std::vector<std::string> labels;
  std::vector<std::string> predictors;
  Vector thresholds;  // J-1, strictly increasing
  Vector slopes;      // p
  Vector threshold_std_errors;
  Vector slope_std_errors;
  Matrix covariance;  // (J-1+p) square, thresholds first
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> loglik_trace;  // accepted iterates
};

/// Log-likelihood and its analytic gradient in (thresholds, slopes) order.
/// `weights` may be empty (all ones).
double ordinal_log_likelihood(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                              const std::vector<int>& codes, const Vector& weights = {});
Vector ordinal_gradient(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                        const std::vector<int>& codes, const Vector& weights = {});
Matrix ordinal_hessian(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                       const std::vector<int>& codes, const Vector& weights = {});

/// Newton iterations on an unconstrained threshold parameterization
/// (first cutpoint free, log increments) with step-halving.
/// Throws SeparationError when the slope norm diverges past
/// `separation_norm` while the likelihood still improves or a converged
/// slope exceeds `separation_slope` per predictor sd, ConvergenceError
/// after max_iterations.
OrdinalFit fit_ordinal(const Matrix& X, const CategoricalOutcome& outcome,
                       const std::vector<std::string>& predictors, const Vector& weights = {},
                       const OrdinalOptions& options = {});
OrdinalFit fit_ordinal(const Dataset& d, const CategoricalOutcome& outcome,
                       const std::vector<std::string>& predictors,
                       const OrdinalOptions& options = {});

/// Category probabilities sigma(theta_j - x'b) - sigma(theta_{j-1} - x'b).
Vector predict_category_probs(const Vector& thresholds, const Vector& slopes, const Vector& x);
Vector predict_category_probs(const OrdinalFit& fit, const Vector& x);

struct ForestRow {
  std::string term;
  double estimate = 0.0;  // log odds ratio
  double lo = 0.0;
  double hi = 0.0;
  double p_value = 1.0;
};

std::vector<ForestRow> forest_data(const OrdinalFit& fit, double level = 0.95);
std::string forest_tsv(const std::vector<ForestRow>& rows);

}  // namespace sparsereg
