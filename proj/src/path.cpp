#include "sparsereg/path.hpp"

#include <cmath>
#include <exception>

#include <json.hpp>

#include "sparsereg/error.hpp"

namespace sparsereg {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::multinomial: return "multinomial";
    case Family::multitask: return "multitask";
  }
  return "gaussian";
}

LambdaRule parse_lambda_rule(std::string_view text) {
  if (text == "min") return LambdaRule::min;
  if (text == "1se") return LambdaRule::one_se;
  throw ConfigError("lambda rule must be 'min' or '1se', got '" + std::string(text) + "'");
}

std::string_view lambda_rule_name(LambdaRule rule) {
  return rule == LambdaRule::min ? "min" : "1se";
}

std::vector<double> LassoPath::lambdas() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(pt.lambda);
  return out;
}

std::size_t LassoPath::index_of(double lambda) const {
  for (std::size_t k = 0; k < points.size(); ++k)
    if (std::abs(points[k].lambda - lambda) <= 1e-10 * std::max(std::abs(lambda), 1e-300))
      return k;
  throw DataError("lambda " + std::to_string(lambda) + " is not on the path");
}

double default_min_ratio(std::size_t n, std::size_t p) { return n > p ? 1e-3 : 1e-2; }

std::vector<double> lambda_grid(double lambda_max, int n_lambda, double min_ratio) {
  if (n_lambda < 1) throw ConfigError("n_lambda must be positive");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) throw ConfigError("lambda_min_ratio must be in (0,1)");
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  if (lambda_max <= 0.0) {
    // Degenerate outcome: a single all-zero point.
    return {0.0};
  }
  if (n_lambda == 1) return {lambda_max};
  const double lo = std::log(min_ratio);
  for (int k = 0; k < n_lambda; ++k)
    grid[static_cast<std::size_t>(k)] =
        lambda_max * std::exp(lo * static_cast<double>(k) / static_cast<double>(n_lambda - 1));
  grid.front() = lambda_max;
  return grid;
}

double CvResult::selected(LambdaRule rule) const {
  return rule == LambdaRule::min ? lambda_min : lambda_1se;
}

std::size_t CvResult::selected_index(LambdaRule rule) const {
  return rule == LambdaRule::min ? index_min : index_1se;
}

CvResult summarize_cv(const std::vector<double>& lambdas,
                      const std::vector<std::vector<double>>& fold_losses) {
  const std::size_t L = lambdas.size();
  const std::size_t k = fold_losses.size();
  if (L == 0 || k < 2) throw DataError("cv: need at least one lambda and two folds");
  CvResult cv;
  cv.lambdas = lambdas;
  cv.n_folds = static_cast<int>(k);
  cv.cv_mean.assign(L, 0.0);
  cv.cv_se.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double sum = 0.0;
    for (const auto& f : fold_losses) sum += f.at(l);
    const double mean = sum / static_cast<double>(k);
    double ss = 0.0;
    for (const auto& f : fold_losses) ss += (f[l] - mean) * (f[l] - mean);
    cv.cv_mean[l] = mean;
    cv.cv_se[l] = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < L; ++l)
    if (cv.cv_mean[l] < cv.cv_mean[best]) best = l;
  cv.index_min = best;
  cv.lambda_min = lambdas[best];
  const double bound = cv.cv_mean[best] + cv.cv_se[best];
  std::size_t one_se = best;
  for (std::size_t l = 0; l <= best; ++l) {
    if (cv.cv_mean[l] <= bound) {
      one_se = l;
      break;
    }
  }
  cv.index_1se = one_se;
  cv.lambda_1se = lambdas[one_se];
  return cv;
}

std::vector<std::vector<double>> run_folds(
    int k, const std::function<std::vector<double>(int)>& fold_loss) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(k));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));
#pragma omp parallel for schedule(dynamic, 1)
  for (int f = 0; f < k; ++f) {
    try {
      out[static_cast<std::size_t>(f)] = fold_loss(f);
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void check_folds(const FoldAssignment& folds, std::size_t n) {
  if (folds.fold_id.size() != n) throw DataError("cv: fold assignment does not cover the rows");
  for (int f = 0; f < folds.k; ++f) {
    const std::size_t train = folds.train_rows(f).size();
    if (train < 2)
      throw DataError("cv: fold " + std::to_string(f) + " leaves " + std::to_string(train) +
                      " training rows");
  }
}

std::string path_json(const LassoPath& path) {
  nlohmann::ordered_json j;
  j["family"] = family_name(path.family);
  j["predictors"] = path.predictors;
  j["responses"] = path.responses;
  j["lambda_max"] = path.lambda_max;
  j["lambdas"] = path.lambdas();
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& pt : path.points) {
    nlohmann::ordered_json p;
    p["lambda"] = pt.lambda;
    p["intercept"] = std::vector<double>(pt.intercept.data(), pt.intercept.data() + pt.intercept.size());
    nlohmann::ordered_json nz = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < pt.coefficients.rows(); ++r)
      for (Eigen::Index c = 0; c < pt.coefficients.cols(); ++c)
        if (pt.coefficients(r, c) != 0.0) {
          if (pt.coefficients.cols() == 1) nz.push_back({r, pt.coefficients(r, c)});
          else nz.push_back({r, c, pt.coefficients(r, c)});
        }
    p["nonzero"] = nz;
    p["n_nonzero"] = pt.n_nonzero;
    pts.push_back(p);
  }
  j["path"] = pts;
  return j.dump(2) + "\n";
}

std::string cv_json(const CvResult& cv) {
  nlohmann::ordered_json j;
  j["n_folds"] = cv.n_folds;
  j["lambdas"] = cv.lambdas;
  j["cv_mean"] = cv.cv_mean;
  j["cv_se"] = cv.cv_se;
  j["lambda_min"] = cv.lambda_min;
  j["lambda_1se"] = cv.lambda_1se;
  return j.dump(2) + "\n";
}

}  // namespace sparsereg
