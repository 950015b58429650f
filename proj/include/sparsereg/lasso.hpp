#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/path.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

/// sign(z) * max(|z| - gamma, 0)
double soft_threshold(double z, double gamma);

/// max_j |x_j' y| / n for standardized X and centered y.
double lambda_max_gaussian(const Matrix& X_std, const Vector& y_centered);

/// l1-penalized least squares, (1/2n)||y - b0 - Xb||^2 + lambda ||b||_1 with
/// X standardized internally (population sd), by coordinate descent with warm
/// starts down the lambda grid. When `sweep_objectives` is given it receives,
/// per lambda, the penalized objective after every coordinate sweep.
LassoPath fit_lasso_path(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                         const PathConfig& config = {},
                         std::vector<std::vector<double>>* sweep_objectives = nullptr);
LassoPath fit_lasso_path(const Dataset& d, std::string_view outcome,
                         const std::vector<std::string>& predictors,
                         const PathConfig& config = {});

Vector predict_gaussian(const PathPoint& point, const Matrix& X);

/// (1/2n)||y - b0 - Xb||^2 + lambda ||b||_1 on the standardized scale.
double gaussian_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                          const Vector& y);

/// Largest KKT residual of a path point on the standardized scale:
/// |g_j| - lambda for zero coefficients, |g_j - lambda sign(b_j)| for active
/// ones, with g = X_std' r / n.
double gaussian_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                              const Vector& y);

/// K-fold CV on held-out mean squared error over the full-data lambda grid.
CvResult cv_lasso(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                  const FoldAssignment& folds, const PathConfig& config = {},
                  const FoldScreen& screen = {});

struct WeightedTerm {
  std::string name;
  double coefficient = 0.0;
  double weight = 0.0;  // |coefficient| or row norm
};

/// Nonzero coefficients at a path lambda, by |coefficient| descending, at most
/// top_k rows.
std::vector<WeightedTerm> nonzero_report(const LassoPath& path, double lambda,
                                         std::size_t top_k);
std::string nonzero_report_tsv(const std::vector<WeightedTerm>& rows);

}  // namespace sparsereg
