#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sparsereg/dataset.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg {

enum class ScreenMethod { correlation, marginal_mle };

struct RankedPredictor {
  std::string name;
  double score = 0.0;  // signed; ranking uses |score|
};

/// Sure independence screening result.
struct ScreenResult {
  std::vector<RankedPredictor> ranked;  // |score| non-increasing, ties by column order
  std::vector<std::string> kept;        // first d of ranked
  std::size_t d = 0;
  ScreenMethod method = ScreenMethod::correlation;
  std::vector<std::string> warnings;
};

/// ceil(n / ln n), the conventional SIS retention size.
std::size_t default_screen_size(std::size_t n);

/// Orders predictors by |score| and keeps the top d_keep (clamped to p).
ScreenResult rank_scores(const std::vector<std::string>& names, const Vector& scores,
                         std::size_t d_keep, ScreenMethod method);

/// Marginal |Pearson correlation| screening against a continuous outcome.
ScreenResult sis_screen(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                        std::size_t d_keep);
ScreenResult sis_screen(const Dataset& d, std::string_view outcome,
                        const std::vector<std::string>& predictors, std::size_t d_keep);

/// Pooled two-sample t statistic per predictor between the two outcome groups
/// (`group` holds 0/1). Monotone in the correlation with the 0/1 coding.
ScreenResult sis_screen_binary(const Matrix& X, const std::vector<int>& group,
                               const std::vector<std::string>& names, std::size_t d_keep);

/// Multi-response screening: score is the root-mean-square correlation of a
/// predictor across the response columns.
ScreenResult sis_screen_multi(const Matrix& X, const Matrix& Y,
                              const std::vector<std::string>& names, std::size_t d_keep);

using LevelPair = std::pair<std::string, std::string>;

/// One binary screen per unordered level pair, each on the rows of those two
/// levels. d_keep == 0 uses default_screen_size of each pair's row count.
std::map<LevelPair, ScreenResult> pairwise_screens(const Matrix& X,
                                                   const CategoricalOutcome& outcome,
                                                   const std::vector<std::string>& names,
                                                   std::size_t d_keep = 0);

std::string screen_tsv(const ScreenResult& result);

}  // namespace sparsereg
