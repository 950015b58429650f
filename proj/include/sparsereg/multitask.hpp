#pragma once

#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/lasso.hpp"
#include "sparsereg/path.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

/// v * max(1 - gamma / ||v||, 0); exactly zero when ||v|| <= gamma.
Vector group_soft_threshold(const Vector& v, double gamma);

struct MultiTaskFit {
  std::vector<std::string> responses;
  std::vector<std::string> predictors;
  Vector intercepts;    // m
  Matrix coefficients;  // p x m, zero rows are bitwise zero
  double lambda = 0.0;
  std::vector<std::size_t> active_rows;
};

/// Multi-response Gaussian regression with a row-wise group penalty:
///   (1/2n) ||Y - 1 b0' - X B||_F^2 + lambda * w * sum_j ||B_j||_2
/// with w = 1 (or sqrt(m) when config.sqrt_group_weight), fitted by block
/// coordinate descent over predictor rows. With standardize_responses on,
/// the objective and lambda refer to unit-sd responses; coefficients are
/// always reported on the original scale.
LassoPath fit_multitask_path(const Matrix& X, const Matrix& Y,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& responses,
                             const PathConfig& config = {});

MultiTaskFit multitask_fit_at(const LassoPath& path, std::size_t index);
Matrix predict_multitask(const PathPoint& point, const Matrix& X);

/// Objective on the solver's scale (standardized X, scaled responses).
double multitask_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                           const Matrix& Y);
double multitask_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                               const Matrix& Y);

/// CV on held-out mean squared Frobenius residual per row (solver scale).
CvResult cv_multitask(const Matrix& X, const Matrix& Y, const std::vector<std::string>& names,
                      const std::vector<std::string>& responses, const FoldAssignment& folds,
                      const PathConfig& config = {}, const FoldScreen& screen = {});

/// Active rows by ||B_j||_2 descending, at most top_k.
std::vector<WeightedTerm> rank_rows(const MultiTaskFit& fit, std::size_t top_k);

std::string multitask_fit_json(const MultiTaskFit& fit);

}  // namespace sparsereg
