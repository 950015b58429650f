#include "sparsereg/multitask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "solver_common.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

Vector group_soft_threshold(const Vector& v, double gamma) {
  const double norm = v.norm();
  if (norm <= gamma) return Vector::Zero(v.size());
  return v * (1.0 - gamma / norm);
}

namespace {

struct ResponseScaling {
  Matrix Y;  // centered and optionally scaled
  Vector mean;
  Vector scale;
};

ResponseScaling scale_responses(const Matrix& Y, bool standardize) {
  ResponseScaling s;
  s.mean = Y.colwise().mean();
  s.scale = Vector::Ones(Y.cols());
  s.Y = Y.rowwise() - s.mean.transpose();
  if (standardize) {
    for (Eigen::Index k = 0; k < Y.cols(); ++k) {
      const double sd = std::sqrt(s.Y.col(k).squaredNorm() / static_cast<double>(Y.rows()));
      if (sd > 0.0) {
        s.scale[k] = sd;
        s.Y.col(k) /= sd;
      }
    }
  }
  return s;
}

// Block coordinate descent over predictor rows on a centered design.
class MultiTaskSolver {
 public:
  MultiTaskSolver(const detail::StandardDesign& design, const Matrix& Y, double weight,
                  const PathConfig& config)
      : X_(design.X),
        excluded_(design.excluded),
        curvature_(design.curvature),
        Y_(Y),
        n_(static_cast<double>(design.X.rows())),
        weight_(weight),
        config_(config),
        B_(Matrix::Zero(design.X.cols(), Y.cols())),
        R_(Y) {}

  const Matrix& coefficients() const { return B_; }

  long solve(double lambda, std::vector<double>* trace) {
    lambda_ = lambda;
    long sweeps = 0;
    double tol = config_.tolerance;
    std::vector<Eigen::Index> all(static_cast<std::size_t>(X_.cols()));
    std::iota(all.begin(), all.end(), 0);
    for (;;) {
      const double change = sweep(all, trace, sweeps);
      if (change < tol) {
        const double kkt = kkt_violation();
        if (kkt <= config_.kkt_tolerance) return sweeps;
        tol = std::max(tol * 0.1, 1e-15);
        if (tol <= 1e-15 && kkt <= 10.0 * config_.kkt_tolerance) return sweeps;
        continue;
      }
      for (;;) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < B_.rows(); ++j)
          if ((B_.row(j).array() != 0.0).any()) active.push_back(j);
        if (sweep(active, trace, sweeps) < tol) break;
      }
    }
  }

  double objective() const {
    double penalty = 0.0;
    for (Eigen::Index j = 0; j < B_.rows(); ++j) penalty += B_.row(j).norm();
    return R_.squaredNorm() / (2.0 * n_) + lambda_ * weight_ * penalty;
  }

 private:
  double sweep(const std::vector<Eigen::Index>& rows, std::vector<double>* trace, long& sweeps) {
    if (++sweeps > config_.max_sweeps)
      throw ConvergenceError("multitask: no convergence within " +
                                 std::to_string(config_.max_sweeps) + " sweeps at lambda " +
                                 format_number(lambda_),
                             lambda_);
    double max_change = 0.0;
    for (Eigen::Index j : rows) {
      if (excluded_[static_cast<std::size_t>(j)]) continue;
      const Vector old = B_.row(j).transpose();
      const double v = curvature_[j];
      const Vector u = (X_.col(j).transpose() * R_).transpose() / n_ + v * old;
      const Vector updated = group_soft_threshold(u, lambda_ * weight_) / v;
      const Vector delta = updated - old;
      const double change = delta.cwiseAbs().maxCoeff() * std::sqrt(v);
      if (change == 0.0) continue;
      B_.row(j) = updated.transpose();
      R_.noalias() -= X_.col(j) * delta.transpose();
      max_change = std::max(max_change, change);
    }
    if (trace) trace->push_back(objective());
    return max_change;
  }

  double kkt_violation() const {
    const Matrix G = kernels::column_dots(X_, R_, n_);
    const double gamma = lambda_ * weight_;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < G.rows(); ++j) {
      if (excluded_[static_cast<std::size_t>(j)]) continue;
      const double norm = B_.row(j).norm();
      const double v = norm == 0.0
                           ? G.row(j).norm() - gamma
                           : (G.row(j) - gamma * B_.row(j) / norm).cwiseAbs().maxCoeff();
      worst = std::max(worst, v);
    }
    return worst;
  }

  const Matrix& X_;
  const std::vector<std::uint8_t>& excluded_;
  const Vector& curvature_;
  const Matrix& Y_;
  double n_;
  double weight_;
  const PathConfig& config_;
  double lambda_ = 0.0;
  Matrix B_;
  Matrix R_;
};

// Coefficients on the solver scale for a stored path point.
Matrix solver_scale(const LassoPath& path, const PathPoint& pt) {
  Matrix B = pt.coefficients;
  for (Eigen::Index j = 0; j < B.rows(); ++j) B.row(j) *= path.x_scale[j];
  for (Eigen::Index k = 0; k < B.cols(); ++k) B.col(k) /= path.y_scale[k];
  return B;
}

Matrix scaled_residual(const LassoPath& path, const PathPoint& pt, const Matrix& X,
                       const Matrix& Y) {
  Matrix R = Y - predict_multitask(pt, X);
  for (Eigen::Index k = 0; k < R.cols(); ++k) R.col(k) /= path.y_scale[k];
  return R;
}

}  // namespace

LassoPath fit_multitask_path(const Matrix& X, const Matrix& Y,
                             const std::vector<std::string>& names,
                             const std::vector<std::string>& responses, const PathConfig& config) {
  if (Y.cols() == 0) throw DataError("multitask: no response columns");
  if (X.rows() != Y.rows()) throw DataError("multitask: response rows do not match predictors");
  if (names.size() != static_cast<std::size_t>(X.cols()))
    throw DataError("multitask: predictor name count does not match design");
  if (responses.size() != static_cast<std::size_t>(Y.cols()))
    throw DataError("multitask: response name count does not match responses");
  if (X.rows() < 2) throw DataError("multitask: need at least 2 rows");
  if (!X.allFinite() || !Y.allFinite()) throw DataError("multitask: non-finite input");

  const detail::StandardDesign design = detail::standardize_design(X, config.standardize);
  const ResponseScaling ys = scale_responses(Y, config.standardize_responses);
  const double weight = config.sqrt_group_weight ? std::sqrt(static_cast<double>(Y.cols())) : 1.0;
  const double n = static_cast<double>(X.rows());

  const Matrix G = kernels::column_dots(design.X, ys.Y, n);
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < G.rows(); ++j) lmax = std::max(lmax, G.row(j).norm());
  lmax /= weight;

  LassoPath path;
  path.family = Family::multitask;
  path.predictors = names;
  path.responses = responses;
  path.lambda_max = lmax;
  path.x_mean = design.mean;
  path.x_scale = design.scale;
  path.excluded = design.excluded;
  path.y_mean = ys.mean;
  path.y_scale = ys.scale;
  path.group_weight = weight;

  const auto grid = detail::resolve_grid(config, lmax, static_cast<std::size_t>(X.rows()),
                                         static_cast<std::size_t>(X.cols()));
  MultiTaskSolver solver(design, ys.Y, weight, config);
  for (double lambda : grid) {
    PathPoint pt;
    pt.lambda = lambda;
    Matrix B = Matrix::Zero(X.cols(), Y.cols());
    if (lambda < lmax) {
      pt.sweeps = solver.solve(lambda, nullptr);
      B = solver.coefficients();
    }
    // Back to the original scale; zero rows stay bitwise zero.
    for (Eigen::Index j = 0; j < B.rows(); ++j) B.row(j) /= design.scale[j];
    for (Eigen::Index k = 0; k < B.cols(); ++k) B.col(k) *= ys.scale[k];
    pt.coefficients = B;
    pt.intercept = ys.mean - (design.mean.transpose() * B).transpose();
    pt.n_nonzero = detail::count_nonzero_rows(B);
    path.points.push_back(std::move(pt));
  }
  return path;
}

MultiTaskFit multitask_fit_at(const LassoPath& path, std::size_t index) {
  if (path.family != Family::multitask) throw DataError("multitask_fit_at: not a multitask path");
  const PathPoint& pt = path.points.at(index);
  MultiTaskFit fit;
  fit.responses = path.responses;
  fit.predictors = path.predictors;
  fit.intercepts = pt.intercept;
  fit.coefficients = pt.coefficients;
  fit.lambda = pt.lambda;
  for (Eigen::Index j = 0; j < pt.coefficients.rows(); ++j)
    if (pt.coefficients.row(j).norm() > 0.0) fit.active_rows.push_back(static_cast<std::size_t>(j));
  return fit;
}

Matrix predict_multitask(const PathPoint& point, const Matrix& X) {
  return (X * point.coefficients).rowwise() + point.intercept.transpose();
}

double multitask_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                           const Matrix& Y) {
  const PathPoint& pt = path.points.at(index);
  const Matrix B = solver_scale(path, pt);
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < B.rows(); ++j) penalty += B.row(j).norm();
  return scaled_residual(path, pt, X, Y).squaredNorm() / (2.0 * static_cast<double>(X.rows())) +
         pt.lambda * path.group_weight * penalty;
}

double multitask_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                               const Matrix& Y) {
  const PathPoint& pt = path.points.at(index);
  const Matrix Xs = detail::apply_scaling(X, path.x_mean, path.x_scale, path.excluded);
  const Matrix G = kernels::column_dots(Xs, scaled_residual(path, pt, X, Y),
                                        static_cast<double>(X.rows()));
  const Matrix B = solver_scale(path, pt);
  const double gamma = pt.lambda * path.group_weight;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < G.rows(); ++j) {
    if (path.excluded[static_cast<std::size_t>(j)]) continue;
    const double norm = B.row(j).norm();
    const double v = norm == 0.0 ? G.row(j).norm() - gamma
                                 : (G.row(j) - gamma * B.row(j) / norm).cwiseAbs().maxCoeff();
    worst = std::max(worst, v);
  }
  return worst;
}

CvResult cv_multitask(const Matrix& X, const Matrix& Y, const std::vector<std::string>& names,
                      const std::vector<std::string>& responses, const FoldAssignment& folds,
                      const PathConfig& config, const FoldScreen& screen) {
  check_folds(folds, static_cast<std::size_t>(X.rows()));
  LassoPath full = fit_multitask_path(X, Y, names, responses, config);
  PathConfig fold_config = config;
  fold_config.lambdas = full.lambdas();
  auto losses = run_folds(folds.k, [&](int f) {
    const auto train = folds.train_rows(f);
    const auto test = folds.test_rows(f);
    const auto fd = detail::fold_design(X, names, screen, train, test);
    const LassoPath path =
        fit_multitask_path(fd.train, detail::take_rows(Y, train), fd.names, responses, fold_config);
    const Matrix& Xt = fd.test;
    const Matrix Yt = detail::take_rows(Y, test);
    std::vector<double> loss;
    for (const auto& pt : path.points) {
      // Held-out residuals in the full-data response units, so every fold
      // weighs responses identically.
      Matrix R = Yt - predict_multitask(pt, Xt);
      for (Eigen::Index k = 0; k < R.cols(); ++k) R.col(k) /= full.y_scale[k];
      loss.push_back(R.squaredNorm() / static_cast<double>(test.size()));
    }
    return loss;
  });
  CvResult cv = summarize_cv(fold_config.lambdas, losses);
  cv.path = std::move(full);
  return cv;
}

std::vector<WeightedTerm> rank_rows(const MultiTaskFit& fit, std::size_t top_k) {
  std::vector<WeightedTerm> rows;
  for (std::size_t j : fit.active_rows) {
    const double norm = fit.coefficients.row(static_cast<Eigen::Index>(j)).norm();
    rows.push_back({fit.predictors[j], norm, norm});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const WeightedTerm& a, const WeightedTerm& b) { return a.weight > b.weight; });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

std::string multitask_fit_json(const MultiTaskFit& fit) {
  nlohmann::ordered_json j;
  j["responses"] = fit.responses;
  j["lambda"] = fit.lambda;
  j["intercepts"] = std::vector<double>(fit.intercepts.data(), fit.intercepts.data() + fit.intercepts.size());
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t r : fit.active_rows) {
    const auto row = fit.coefficients.row(static_cast<Eigen::Index>(r));
    std::vector<double> values(static_cast<std::size_t>(row.size()));
    for (Eigen::Index k = 0; k < row.size(); ++k) values[static_cast<std::size_t>(k)] = row[k];
    rows.push_back({{"predictor", fit.predictors[r]}, {"coefficients", values}});
  }
  j["active_rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace sparsereg
