#include "sparsereg/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "sparsereg/error.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

namespace {

// Pivots below this fraction of the largest |R_ii| count as dependent.
constexpr double kRankThreshold = 1e-10;

}  // namespace

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double normal_two_sided_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(z)) return 0.0;
  return 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(),
                                                        std::abs(z)));
}

double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

std::pair<double, double> wald_ci(double estimate, double std_error, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0,1)");
  if (std_error < 0.0) throw ConfigError("standard error must be nonnegative");
  const double z = normal_quantile((1.0 + level) / 2.0);
  return {estimate - z * std_error, estimate + z * std_error};
}

OlsFit fit_ols(const Matrix& X, const Vector& y, const std::vector<std::string>& names) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (names.size() != p) throw DataError("ols: predictor name count does not match design");
  if (n <= p + 1)
    throw DataError("ols: need more than p + 1 = " + std::to_string(p + 1) + " rows, have " +
                    std::to_string(n));

  Matrix design(X.rows(), X.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(X.cols()) = X;

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(kRankThreshold);
  const auto rank = static_cast<std::size_t>(qr.rank());
  std::vector<std::string> terms{"(Intercept)"};
  terms.insert(terms.end(), names.begin(), names.end());
  if (rank < p + 1) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t k = rank; k < p + 1; ++k) offending.push_back(terms[perm[k]]);
    std::string list;
    for (const auto& o : offending) list += (list.empty() ? "" : ", ") + o;
    throw RankDeficientError("ols: design is rank deficient; dependent columns: " + list,
                             offending);
  }

  OlsFit fit;
  fit.terms = terms;
  fit.n = n;
  fit.residual_df = n - p - 1;
  fit.coefficients = qr.solve(y);
  fit.residuals = y - design * fit.coefficients;

  const double sse = fit.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  if (sst <= 0.0) throw DataError("ols: outcome is constant");
  const double df = static_cast<double>(fit.residual_df);
  fit.sigma = std::sqrt(sse / df);
  fit.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);
  fit.adjusted_r_squared =
      1.0 - (1.0 - fit.r_squared) * (static_cast<double>(n) - 1.0) / df;

  // (X'X)^{-1} = P R^{-1} R^{-T} P'
  const auto k = static_cast<Eigen::Index>(p + 1);
  const Matrix R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Matrix Rinv = R.triangularView<Eigen::Upper>().solve(Matrix::Identity(k, k));
  const Matrix unpermuted = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation().indices();
  Vector var(k);
  for (Eigen::Index a = 0; a < k; ++a) var[perm[a]] = unpermuted(a, a);

  fit.std_errors = (var.array() * fit.sigma * fit.sigma).sqrt();
  fit.t_values.resize(k);
  fit.p_values.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double se = fit.std_errors[j];
    const double b = fit.coefficients[j];
    fit.t_values[j] = se > 0.0 ? b / se
                               : (b == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                           : std::copysign(std::numeric_limits<double>::infinity(), b));
    fit.p_values[j] = t_two_sided_p(fit.t_values[j], df);
  }
  return fit;
}

OlsFit fit_ols(const Dataset& d, std::string_view outcome,
               const std::vector<std::string>& predictors) {
  return fit_ols(d.matrix(predictors), d.vector(outcome), predictors);
}

std::string ols_tsv(const OlsFit& fit) {
  std::string out = "term\testimate\tstd_error\tt_value\tp_value\n";
  for (std::size_t j = 0; j < fit.terms.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out += fit.terms[j] + "\t" + format_number(fit.coefficients[k]) + "\t" +
           format_number(fit.std_errors[k]) + "\t" + format_number(fit.t_values[k]) + "\t" +
           format_number(fit.p_values[k]) + "\n";
  }
  return out;
}

CorrelationFilterResult correlation_filter(const Dataset& d,
                                           const std::vector<std::string>& predictors,
                                           double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ConfigError("correlation threshold must be in (0,1]");
  const Matrix X = d.matrix(predictors);
  const auto n = static_cast<double>(X.rows());
  Matrix centered = X.rowwise() - X.colwise().mean();
  Vector norms = centered.colwise().norm();

  CorrelationFilterResult result;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const bool constant = norms[j] <= 1e-12 * std::sqrt(n) * (X.col(j).cwiseAbs().maxCoeff() + 1.0);
    if (constant) {
      result.constant.push_back(predictors[j]);
      result.retained.push_back(predictors[j]);
      continue;
    }
    bool drop = false;
    for (Eigen::Index k : kept) {
      const double r = centered.col(j).dot(centered.col(k)) / (norms[j] * norms[k]);
      // Exact collinearity always drops, even at threshold 1.
      if (std::abs(r) > threshold || std::abs(r) >= 1.0 - 1e-12) {
        result.dropped.emplace_back(predictors[j], predictors[k]);
        drop = true;
        break;
      }
    }
    if (!drop) {
      kept.push_back(j);
      result.retained.push_back(predictors[j]);
    }
  }
  return result;
}

}  // namespace sparsereg
