#include "sparsereg/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsereg/error.hpp"
#include "sparsereg/linear.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double density(double z) {
  if (std::isinf(z)) return 0.0;
  return logistic(z) * logistic(-z);
}

double density_slope(double z) {
  if (std::isinf(z)) return 0.0;
  return density(z) * (1.0 - 2.0 * logistic(z));
}

// P(lower < latent <= upper) on the logistic scale, stable in both tails.
double interval_prob(double lower, double upper) {
  if (lower > 0.0) return logistic(-lower) - logistic(-upper);
  return logistic(upper) - logistic(lower);
}

double log_interval_prob(double lower, double upper) {
  if (std::isinf(lower) && lower < 0) return -std::log1p(std::exp(-upper));  // log F(upper)
  if (std::isinf(upper)) return -std::log1p(std::exp(lower));               // log F(-lower)
  return std::log(interval_prob(lower, upper));
}

struct Bounds {
  double lower;
  double upper;
};

Bounds bounds(const Vector& thresholds, int code, double eta) {
  const auto J1 = static_cast<int>(thresholds.size());
  return {code == 0 ? -kInf : thresholds[code - 1] - eta,
          code == J1 ? kInf : thresholds[code] - eta};
}

double weight_of(const Vector& weights, Eigen::Index i) {
  return weights.size() == 0 ? 1.0 : weights[i];
}

void check_inputs(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                  const std::vector<int>& codes, const Vector& weights) {
  if (X.cols() != slopes.size()) throw DataError("ordinal: slope count does not match predictors");
  if (static_cast<std::size_t>(X.rows()) != codes.size())
    throw DataError("ordinal: outcome length does not match rows");
  if (weights.size() != 0 && weights.size() != X.rows())
    throw DataError("ordinal: weight length does not match rows");
  const auto J1 = static_cast<int>(thresholds.size());
  for (int c : codes)
    if (c < 0 || c > J1) throw DataError("ordinal: category code out of range");
}

// Thresholds from the unconstrained parameterization: first free, then
// positive increments exp(a_j).
Vector thresholds_from(const Vector& a) {
  Vector t(a.size());
  for (Eigen::Index j = 0; j < a.size(); ++j) t[j] = j == 0 ? a[0] : t[j - 1] + std::exp(a[j]);
  return t;
}

Vector unconstrained_from(const Vector& thresholds) {
  Vector a(thresholds.size());
  for (Eigen::Index j = 0; j < a.size(); ++j)
    a[j] = j == 0 ? thresholds[0] : std::log(thresholds[j] - thresholds[j - 1]);
  return a;
}

}  // namespace

double ordinal_log_likelihood(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                              const std::vector<int>& codes, const Vector& weights) {
  check_inputs(thresholds, slopes, X, codes, weights);
  const Vector eta = X * slopes;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Bounds b = bounds(thresholds, codes[i], eta[i]);
    ll += weight_of(weights, i) * log_interval_prob(b.lower, b.upper);
  }
  return ll;
}

Vector ordinal_gradient(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                        const std::vector<int>& codes, const Vector& weights) {
  check_inputs(thresholds, slopes, X, codes, weights);
  const Eigen::Index J1 = thresholds.size();
  const Eigen::Index p = slopes.size();
  const Vector eta = X * slopes;
  Vector g = Vector::Zero(J1 + p);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int c = codes[i];
    const Bounds b = bounds(thresholds, c, eta[i]);
    const double P = interval_prob(b.lower, b.upper);
    const double A = density(b.upper);
    const double B = density(b.lower);
    const double w = weight_of(weights, i);
    if (c < J1) g[c] += w * A / P;
    if (c > 0) g[c - 1] -= w * B / P;
    g.tail(p) -= w * (A - B) / P * X.row(i).transpose();
  }
  return g;
}

Matrix ordinal_hessian(const Vector& thresholds, const Vector& slopes, const Matrix& X,
                       const std::vector<int>& codes, const Vector& weights) {
  check_inputs(thresholds, slopes, X, codes, weights);
  const Eigen::Index J1 = thresholds.size();
  const Eigen::Index p = slopes.size();
  const Vector eta = X * slopes;
  Matrix H = Matrix::Zero(J1 + p, J1 + p);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int c = codes[i];
    const Bounds b = bounds(thresholds, c, eta[i]);
    const double P = interval_prob(b.lower, b.upper);
    const double A = density(b.upper);
    const double B = density(b.lower);
    const double dA = density_slope(b.upper);
    const double dB = density_slope(b.lower);
    const double w = weight_of(weights, i);
    const auto x = X.row(i).transpose();
    if (c < J1) {
      H(c, c) += w * (dA / P - A * A / (P * P));
      H.block(c, J1, 1, p) += w * (-dA / P + A * (A - B) / (P * P)) * x.transpose();
    }
    if (c > 0) {
      H(c - 1, c - 1) += w * (-dB / P - B * B / (P * P));
      H.block(c - 1, J1, 1, p) += w * (dB / P - B * (A - B) / (P * P)) * x.transpose();
    }
    if (c > 0 && c < J1) {
      H(c, c - 1) += w * A * B / (P * P);
      H(c - 1, c) += w * A * B / (P * P);
    }
    H.bottomRightCorner(p, p) += w * ((dA - dB) / P - (A - B) * (A - B) / (P * P)) * x * x.transpose();
  }
  H.block(J1, 0, p, J1) = H.block(0, J1, J1, p).transpose();
  return H;
}

OrdinalFit fit_ordinal(const Matrix& X, const CategoricalOutcome& outcome,
                       const std::vector<std::string>& predictors, const Vector& weights,
                       const OrdinalOptions& options) {
  const int J = outcome.n_levels();
  if (J < 2) throw DataError("ordinal: need at least 2 categories");
  if (predictors.size() != static_cast<std::size_t>(X.cols()))
    throw DataError("ordinal: predictor name count does not match design");
  const Eigen::Index p = X.cols();
  const Eigen::Index J1 = J - 1;

  std::vector<double> mass(J, 0.0);
  for (std::size_t i = 0; i < outcome.codes.size(); ++i)
    mass[outcome.codes[i]] += weight_of(weights, static_cast<Eigen::Index>(i));
  for (int j = 0; j < J; ++j)
    if (mass[j] <= 0.0)
      throw DataError("ordinal: category '" + outcome.labels[j] + "' is never observed");
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);

  // Start at the intercept-only MLE: logits of cumulative proportions.
  Vector theta(J1);
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < J1; ++j) {
    cumulative += mass[j];
    const double q = cumulative / total;
    theta[j] = std::log(q / (1.0 - q));
  }
  Vector a = unconstrained_from(theta);
  Vector beta = Vector::Zero(p);
  double ll = ordinal_log_likelihood(theta, beta, X, outcome.codes, weights);

  OrdinalFit fit;
  fit.labels = outcome.labels;
  fit.predictors = predictors;
  fit.loglik_trace.push_back(ll);

  bool converged = false;
  bool polish = false;
  int growth_streak = 0;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Vector g = ordinal_gradient(theta, beta, X, outcome.codes, weights);
    if (g.cwiseAbs().maxCoeff() < options.gradient_tolerance) {
      converged = true;
      break;
    }
    const Matrix H = ordinal_hessian(theta, beta, X, outcome.codes, weights);
    Matrix info = -H;
    Eigen::LDLT<Matrix> ldlt(info);
    double ridge = 0.0;
    while (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
           (ldlt.vectorD().array() <= 1e-14 * info.diagonal().cwiseAbs().maxCoeff()).any()) {
      ridge = ridge == 0.0 ? 1e-8 * (1.0 + info.diagonal().cwiseAbs().maxCoeff()) : ridge * 10.0;
      ldlt.compute(info + ridge * Matrix::Identity(info.rows(), info.cols()));
      if (ridge > 1e12) throw ConvergenceError("ordinal: information matrix is singular");
    }
    const Vector step = ldlt.solve(g);  // Newton step in (theta, beta)

    // Same step expressed in the unconstrained threshold coordinates.
    Vector da(J1);
    for (Eigen::Index j = 0; j < J1; ++j)
      da[j] = j == 0 ? step[0] : (step[j] - step[j - 1]) / std::exp(a[j]);
    const Vector db = step.tail(p);

    double t = 1.0;
    bool accepted = false;
    Vector a_new, beta_new, theta_new;
    double ll_new = ll;
    for (int half = 0; half < 40; ++half, t *= 0.5) {
      a_new = a + t * da;
      beta_new = beta + t * db;
      theta_new = thresholds_from(a_new);
      if (!theta_new.allFinite() || !beta_new.allFinite()) continue;
      ll_new = ordinal_log_likelihood(theta_new, beta_new, X, outcome.codes, weights);
      if (std::isfinite(ll_new) && ll_new >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent along the Newton direction: at a numerical optimum.
      converged = g.cwiseAbs().maxCoeff() < 1e-5 * (1.0 + std::abs(ll));
      break;
    }

    const double old_norm = beta.norm();
    const double change = std::abs(ll_new - ll) / (std::abs(ll) + 1e-300);
    const bool improved = ll_new > ll;
    a = a_new;
    beta = beta_new;
    theta = theta_new;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);

    growth_streak = (beta.norm() > old_norm + 0.1 && improved) ? growth_streak + 1 : 0;
    if (beta.norm() > options.separation_norm && improved)
      throw SeparationError("ordinal: complete separation detected (slope norm " +
                            format_number(beta.norm()) + " diverging while the likelihood improves)");

    if (polish) {
      converged = true;
      ++iter;
      break;
    }
    if (change < options.loglik_tolerance) polish = true;  // one more full step, then stop
  }
  if (!converged) {
    if (growth_streak >= 8)
      throw SeparationError("ordinal: complete separation detected (slope norm " +
                            format_number(beta.norm()) + " diverging while the likelihood improves)");
    throw ConvergenceError("ordinal: no convergence within " +
                           std::to_string(options.max_iterations) + " iterations");
  }

  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt((X.col(j).array() - X.col(j).mean()).square().mean());
    if (std::abs(beta[j]) * sd > options.separation_slope)
      throw SeparationError("ordinal: complete separation detected on '" + predictors[j] +
                            "' (slope " + format_number(beta[j]) + " with saturated likelihood)");
  }

  fit.thresholds = theta;
  fit.slopes = beta;
  fit.log_likelihood = ll;
  fit.converged = true;
  fit.iterations = iter;

  const Matrix info = -ordinal_hessian(theta, beta, X, outcome.codes, weights);
  Eigen::FullPivLU<Matrix> lu(info);
  if (!lu.isInvertible()) throw ConvergenceError("ordinal: information matrix is singular at the MLE");
  fit.covariance = lu.inverse();
  const Vector se = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.threshold_std_errors = se.head(J1);
  fit.slope_std_errors = se.tail(p);
  return fit;
}

OrdinalFit fit_ordinal(const Dataset& d, const CategoricalOutcome& outcome,
                       const std::vector<std::string>& predictors, const OrdinalOptions& options) {
  if (outcome.codes.size() != d.n_rows()) throw DataError("ordinal: outcome length mismatch");
  return fit_ordinal(d.matrix(predictors), outcome, predictors, Vector(), options);
}

Vector predict_category_probs(const Vector& thresholds, const Vector& slopes, const Vector& x) {
  if (x.size() != slopes.size()) throw DataError("ordinal: predictor vector has wrong length");
  const double eta = x.dot(slopes);
  const Eigen::Index J = thresholds.size() + 1;
  Vector probs(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const double lower = j == 0 ? -kInf : thresholds[j - 1] - eta;
    const double upper = j == J - 1 ? kInf : thresholds[j] - eta;
    probs[j] = std::max(0.0, interval_prob(lower, upper));
  }
  return probs;
}

Vector predict_category_probs(const OrdinalFit& fit, const Vector& x) {
  return predict_category_probs(fit.thresholds, fit.slopes, x);
}

std::vector<ForestRow> forest_data(const OrdinalFit& fit, double level) {
  if (!fit.converged) throw ModelError("forest data requires a converged fit");
  std::vector<ForestRow> rows;
  for (std::size_t j = 0; j < fit.predictors.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const double est = fit.slopes[k];
    const double se = fit.slope_std_errors[k];
    const auto [lo, hi] = wald_ci(est, se, level);
    const double z = se > 0 ? est / se : (est == 0 ? 0.0 : std::copysign(kInf, est));
    rows.push_back({fit.predictors[j], est, lo, hi, normal_two_sided_p(z)});
  }
  return rows;
}

std::string forest_tsv(const std::vector<ForestRow>& rows) {
  std::string out = "term\testimate\tlo\thi\tp\n";
  for (const auto& r : rows)
    out += r.term + "\t" + format_number(r.estimate) + "\t" + format_number(r.lo) + "\t" +
           format_number(r.hi) + "\t" + format_number(r.p_value) + "\n";
  return out;
}

}  // namespace sparsereg
