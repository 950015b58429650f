#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

enum class Family { gaussian, multinomial, multitask };
std::string_view family_name(Family family);

enum class UpdateRule { automatic, naive, covariance };
enum class LambdaRule { min, one_se };
LambdaRule parse_lambda_rule(std::string_view text);
std::string_view lambda_rule_name(LambdaRule rule);

/// Regularization path settings shared by all three families.
struct PathConfig {
  std::vector<double> lambdas;  // explicit decreasing grid; empty = default grid
  int n_lambda = 100;
  double lambda_min_ratio = 0.0;  // 0 = 1e-3 when n > p, else 1e-2
  double tolerance = 1e-7;        // max absolute coefficient change per sweep
  double kkt_tolerance = 1e-7;    // re-sweep until the full KKT check passes this
  long max_sweeps = 100000;
  UpdateRule update = UpdateRule::automatic;  // covariance when p > 500
  bool standardize = true;  // penalize on the unit-variance predictor scale

  // multitask only
  bool standardize_responses = true;
  bool sqrt_group_weight = false;

  // multinomial only
  int max_outer = 1000;
};

/// One solution on the path, on the original predictor scale.
struct PathPoint {
  double lambda = 0.0;
  Vector intercept;     // 1 (gaussian), K (multinomial), m (multitask)
  Matrix coefficients;  // p x columns
  std::size_t n_nonzero = 0;  // nonzero coefficient rows
  long sweeps = 0;
};

struct LassoPath {
  Family family = Family::gaussian;
  std::vector<std::string> predictors;
  std::vector<std::string> responses;  // outcome, class labels, or response names
  std::vector<PathPoint> points;
  double lambda_max = 0.0;

  // Internal scaling; the solver works on (x - mean) / scale.
  Vector x_mean;
  Vector x_scale;
  std::vector<std::uint8_t> excluded;  // constant predictors, held at zero
  Vector y_mean;
  Vector y_scale;  // multitask response scaling (ones when off)
  double group_weight = 1.0;

  std::vector<double> lambdas() const;
  /// Index of a path lambda (relative match 1e-10). Throws DataError when the
  /// value is not on the path.
  std::size_t index_of(double lambda) const;
};

/// Log-spaced grid from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(double lambda_max, int n_lambda, double min_ratio);
double default_min_ratio(std::size_t n, std::size_t p);

/// Cross-validation summary over a shared lambda grid.
struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> cv_mean;
  std::vector<double> cv_se;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::size_t index_min = 0;
  std::size_t index_1se = 0;
  int n_folds = 0;
  LassoPath path;  // refit on all rows

  double selected(LambdaRule rule) const;
  std::size_t selected_index(LambdaRule rule) const;
};

/// Screening repeated inside cross-validation. When set, each fold fits on
/// the columns of `candidates` that `select` picks from the fold's training
/// rows alone, so the held-out loss does not reward what screening saw. The
/// design passed to a cv_* routine is still the all-rows screened design.
struct FoldScreen {
  const Matrix* candidates = nullptr;
  std::function<std::vector<std::size_t>(const std::vector<std::size_t>& train_rows)> select;

  explicit operator bool() const { return candidates != nullptr && static_cast<bool>(select); }
};

/// Combines per-fold held-out losses (folds x lambdas) into a CvResult.
/// cv_se is the across-fold sd over sqrt(k).
CvResult summarize_cv(const std::vector<double>& lambdas,
                      const std::vector<std::vector<double>>& fold_losses);

/// Runs `fold_loss(fold)` for each fold, concurrently when threads allow, and
/// stores results by fold index.
std::vector<std::vector<double>> run_folds(
    int k, const std::function<std::vector<double>(int)>& fold_loss);

/// Checks that every training split keeps at least two rows.
void check_folds(const FoldAssignment& folds, std::size_t n);

std::string path_json(const LassoPath& path);
std::string cv_json(const CvResult& cv);

}  // namespace sparsereg
