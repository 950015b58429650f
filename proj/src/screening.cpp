#include "sparsereg/screening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

std::size_t default_screen_size(std::size_t n) {
  if (n < 3) return 1;
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n) / std::log(static_cast<double>(n))));
}

ScreenResult rank_scores(const std::vector<std::string>& names, const Vector& scores,
                         std::size_t d_keep, ScreenMethod method) {
  if (names.size() != static_cast<std::size_t>(scores.size()))
    throw DataError("screening: name count does not match scores");
  if (d_keep < 1) throw ConfigError("screening: d_keep must be at least 1");
  ScreenResult result;
  result.method = method;
  const std::size_t p = names.size();
  if (d_keep > p) {
    result.warnings.push_back("d_keep " + std::to_string(d_keep) + " exceeds " +
                              std::to_string(p) + " predictors; keeping all");
    d_keep = p;
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(scores[static_cast<Eigen::Index>(a)]) >
           std::abs(scores[static_cast<Eigen::Index>(b)]);
  });
  result.ranked.reserve(p);
  for (std::size_t idx : order)
    result.ranked.push_back({names[idx], scores[static_cast<Eigen::Index>(idx)]});
  result.d = d_keep;
  for (std::size_t k = 0; k < d_keep; ++k) result.kept.push_back(result.ranked[k].name);
  return result;
}

ScreenResult sis_screen(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                        std::size_t d_keep) {
  if (X.rows() != y.size()) throw DataError("screening: outcome length does not match rows");
  return rank_scores(names, kernels::column_correlations(X, y), d_keep, ScreenMethod::correlation);
}

ScreenResult sis_screen(const Dataset& d, std::string_view outcome,
                        const std::vector<std::string>& predictors, std::size_t d_keep) {
  return sis_screen(d.matrix(predictors), d.vector(outcome), predictors, d_keep);
}

ScreenResult sis_screen_binary(const Matrix& X, const std::vector<int>& group,
                               const std::vector<std::string>& names, std::size_t d_keep) {
  if (static_cast<std::size_t>(X.rows()) != group.size())
    throw DataError("screening: group length does not match rows");
  Vector coded(X.rows());
  std::size_t n1 = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    if (group[i] != 0 && group[i] != 1) throw DataError("screening: binary groups must be 0/1");
    coded[static_cast<Eigen::Index>(i)] = group[i];
    n1 += static_cast<std::size_t>(group[i]);
  }
  const std::size_t n0 = group.size() - n1;
  if (n0 < 2 || n1 < 2)
    throw DataError("screening: each group needs at least 2 observations (have " +
                    std::to_string(n0) + " and " + std::to_string(n1) + ")");
  // Pooled two-sample t = r sqrt(n - 2) / sqrt(1 - r^2) for r the correlation
  // with the 0/1 coding.
  const Vector r = kernels::column_correlations(X, coded);
  const double df = static_cast<double>(group.size()) - 2.0;
  Vector t(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const double one_minus = 1.0 - r[j] * r[j];
    t[j] = one_minus <= 0.0 ? std::copysign(std::numeric_limits<double>::infinity(), r[j])
                            : r[j] * std::sqrt(df / one_minus);
  }
  return rank_scores(names, t, d_keep, ScreenMethod::marginal_mle);
}

ScreenResult sis_screen_multi(const Matrix& X, const Matrix& Y,
                              const std::vector<std::string>& names, std::size_t d_keep) {
  if (X.rows() != Y.rows()) throw DataError("screening: response rows do not match predictors");
  if (Y.cols() == 0) throw DataError("screening: no response columns");
  Vector sumsq = Vector::Zero(X.cols());
  for (Eigen::Index k = 0; k < Y.cols(); ++k)
    sumsq += kernels::column_correlations(X, Y.col(k)).cwiseAbs2();
  const Vector score = (sumsq / static_cast<double>(Y.cols())).cwiseSqrt();
  return rank_scores(names, score, d_keep, ScreenMethod::correlation);
}

std::map<LevelPair, ScreenResult> pairwise_screens(const Matrix& X,
                                                   const CategoricalOutcome& outcome,
                                                   const std::vector<std::string>& names,
                                                   std::size_t d_keep) {
  const int J = outcome.n_levels();
  if (J < 2) throw DataError("screening: need at least 2 outcome levels");
  if (outcome.codes.size() != static_cast<std::size_t>(X.rows()))
    throw DataError("screening: outcome length does not match rows");
  std::map<LevelPair, ScreenResult> out;
  for (int a = 0; a < J; ++a) {
    for (int b = a + 1; b < J; ++b) {
      const LevelPair pair{outcome.labels[a], outcome.labels[b]};
      const std::string tag = "pair (" + pair.first + ", " + pair.second + ")";
      std::vector<Eigen::Index> rows;
      std::vector<int> group;
      for (std::size_t i = 0; i < outcome.codes.size(); ++i) {
        if (outcome.codes[i] == a || outcome.codes[i] == b) {
          rows.push_back(static_cast<Eigen::Index>(i));
          group.push_back(outcome.codes[i] == b ? 1 : 0);
        }
      }
      if (rows.empty()) throw DataError("screening: " + tag + " has no rows");
      Matrix sub(static_cast<Eigen::Index>(rows.size()), X.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
      try {
        out.emplace(pair, sis_screen_binary(sub, group, names,
                                            d_keep ? d_keep : default_screen_size(rows.size())));
      } catch (const DataError& e) {
        throw DataError(tag + ": " + e.what());
      }
    }
  }
  return out;
}

std::string screen_tsv(const ScreenResult& result) {
  std::string out = "rank\tname\tscore\n";
  for (std::size_t k = 0; k < result.ranked.size(); ++k)
    out += std::to_string(k + 1) + "\t" + result.ranked[k].name + "\t" +
           format_number(result.ranked[k].score) + "\n";
  return out;
}

}  // namespace sparsereg
