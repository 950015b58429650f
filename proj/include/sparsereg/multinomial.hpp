#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/path.hpp"
#include "sparsereg/screening.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

/// l1-penalized multinomial logistic fit at one lambda, in the symmetric
/// parameterization: every coefficient row and the intercept vector sum to
/// zero across classes.
struct MultinomialFit {
  std::vector<std::string> labels;
  std::vector<std::string> predictors;
  Vector intercepts;    // K
  Matrix coefficients;  // p x K
  double lambda = 0.0;
  double deviance = 0.0;  // on the fitting data
};

/// Max-logit-shifted softmax.
Vector softmax(const Vector& logits);
Vector softmax_probs(const Vector& intercepts, const Matrix& coefficients, const Vector& x);
/// n x K probabilities.
Matrix softmax_probs(const Vector& intercepts, const Matrix& coefficients, const Matrix& X);

/// -2 sum_i log p_{i, g_i}
double multinomial_deviance(const Vector& intercepts, const Matrix& coefficients, const Matrix& X,
                            const std::vector<int>& codes);
double multinomial_deviance(const MultinomialFit& fit, const Matrix& X,
                            const std::vector<int>& codes);

/// Unpenalized mean negative log-likelihood and its gradient with respect to
/// (intercepts, coefficients), flattened as [b0_1..b0_K, B(:,1), ..., B(:,K)].
double multinomial_loss(const Vector& intercepts, const Matrix& coefficients, const Matrix& X,
                        const std::vector<int>& codes);
Vector multinomial_loss_gradient(const Vector& intercepts, const Matrix& coefficients,
                                 const Matrix& X, const std::vector<int>& codes);

/// Mean negative log-likelihood plus lambda * sum |B_jk|, on the standardized
/// predictor scale the solver uses.
double multinomial_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                             const std::vector<int>& codes);

struct MultinomialTrace {
  std::vector<double> objective;  // penalized objective after each outer iteration
};

/// Proximal-Newton block coordinate descent: one weighted lasso per class
/// around the current quadratic approximation, accepted only when the
/// penalized objective does not increase (step-halving otherwise).
/// `trace`, when given, receives one entry per path lambda.
LassoPath fit_multinomial_path(const Matrix& X, const CategoricalOutcome& outcome,
                               const std::vector<std::string>& names,
                               const PathConfig& config = {},
                               std::vector<MultinomialTrace>* trace = nullptr);

/// Symmetric view of one path point with its training deviance.
MultinomialFit multinomial_fit_at(const LassoPath& path, std::size_t index, const Matrix& X,
                                  const std::vector<int>& codes);

/// Largest KKT residual on the standardized scale.
double multinomial_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                                 const std::vector<int>& codes);

/// CV on held-out multinomial deviance per observation.
CvResult cv_multinomial(const Matrix& X, const CategoricalOutcome& outcome,
                        const std::vector<std::string>& names, const FoldAssignment& folds,
                        const PathConfig& config = {}, const FoldScreen& screen = {});

/// Predictors whose log-odds between classes a and b depend on them, i.e.
/// B(j, a) != B(j, b), for every unordered class pair.
std::map<LevelPair, std::set<std::string>> pairwise_active(const MultinomialFit& fit);
std::set<std::string> active_predictors(const MultinomialFit& fit);

struct GeneSets {
  std::set<std::string> union_set;
  std::set<std::string> intersection;
};

GeneSets gene_sets(const std::vector<std::set<std::string>>& sets);
/// Sorted, one name per line.
std::string name_list(const std::set<std::string>& names);

std::string multinomial_fit_json(const MultinomialFit& fit);

}  // namespace sparsereg
