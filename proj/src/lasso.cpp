#include "sparsereg/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "solver_common.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double lambda_max_gaussian(const Matrix& X_std, const Vector& y_centered) {
  if (X_std.cols() == 0) return 0.0;
  const Vector g = kernels::column_dots(X_std, y_centered, static_cast<double>(X_std.rows()));
  return g.cwiseAbs().maxCoeff();
}

namespace {

// Coordinate descent for (1/2n)||y - Xb||^2 + lambda ||b||_1 on a
// centered design and centered y.
class GaussianSolver {
 public:
  GaussianSolver(const detail::StandardDesign& design, const Vector& y, const PathConfig& config)
      : X_(design.X),
        excluded_(design.excluded),
        curvature_(design.curvature),
        y_(y),
        n_(static_cast<double>(design.X.rows())),
        config_(config),
        beta_(Vector::Zero(design.X.cols())),
        residual_(y) {
    const auto p = static_cast<std::size_t>(X_.cols());
    covariance_ = config.update == UpdateRule::covariance ||
                  (config.update == UpdateRule::automatic && p > 500);
    if (covariance_) gram_.resize(p);
  }

  const Vector& beta() const { return beta_; }

  long solve(double lambda, std::vector<double>* trace) {
    lambda_ = lambda;
    long sweeps = 0;
    double tol = config_.tolerance;
    if (covariance_) refresh_gradient();
    std::vector<Eigen::Index> all(static_cast<std::size_t>(X_.cols()));
    std::iota(all.begin(), all.end(), 0);
    for (;;) {
      // Full sweep, then iterate on the active set until it settles.
      double change = sweep(all, trace, sweeps);
      if (change < tol) {
        const double kkt = kkt_violation();
        if (kkt <= config_.kkt_tolerance) return sweeps;
        tol = std::max(tol * 0.1, 1e-15);
        if (tol <= 1e-15 && kkt <= 10.0 * config_.kkt_tolerance) return sweeps;
        continue;
      }
      for (;;) {
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < beta_.size(); ++j)
          if (beta_[j] != 0.0) active.push_back(j);
        if (sweep(active, trace, sweeps) < tol) break;
      }
    }
  }

 private:
  double sweep(const std::vector<Eigen::Index>& coords, std::vector<double>* trace, long& sweeps) {
    if (++sweeps > config_.max_sweeps)
      throw ConvergenceError("lasso: no convergence within " + std::to_string(config_.max_sweeps) +
                                 " sweeps at lambda " + format_number(lambda_),
                             lambda_);
    double max_change = 0.0;
    for (Eigen::Index j : coords) {
      if (excluded_[static_cast<std::size_t>(j)]) continue;
      const double g = covariance_ ? gradient_[j] : X_.col(j).dot(residual_) / n_;
      const double v = curvature_[j];
      const double updated = soft_threshold(g + v * beta_[j], lambda_) / v;
      const double delta = updated - beta_[j];
      if (delta == 0.0) continue;
      beta_[j] = updated;
      if (covariance_) gradient_ -= delta * gram_column(j);
      else residual_ -= delta * X_.col(j);
      max_change = std::max(max_change, std::abs(delta) * std::sqrt(v));
    }
    if (trace) trace->push_back(objective());
    return max_change;
  }

  const Vector& gram_column(Eigen::Index j) {
    auto& col = gram_[static_cast<std::size_t>(j)];
    if (!col) col = kernels::column_dots(X_, Vector(X_.col(j)), n_);
    return *col;
  }

  void refresh_gradient() {
    residual_ = y_ - X_ * beta_;
    gradient_ = kernels::column_dots(X_, residual_, n_);
  }

  double kkt_violation() {
    if (covariance_) refresh_gradient();
    const Vector g = covariance_ ? gradient_ : kernels::column_dots(X_, residual_, n_);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      if (excluded_[static_cast<std::size_t>(j)]) continue;
      const double v = beta_[j] == 0.0 ? std::abs(g[j]) - lambda_
                                       : std::abs(g[j] - lambda_ * (beta_[j] > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  }

  double objective() const {
    const Vector r = covariance_ ? Vector(y_ - X_ * beta_) : residual_;
    return r.squaredNorm() / (2.0 * n_) + lambda_ * beta_.cwiseAbs().sum();
  }

  const Matrix& X_;
  const std::vector<std::uint8_t>& excluded_;
  const Vector& curvature_;
  const Vector& y_;
  double n_;
  const PathConfig& config_;
  bool covariance_ = false;
  double lambda_ = 0.0;
  Vector beta_;
  Vector residual_;
  Vector gradient_;
  std::vector<std::optional<Vector>> gram_;
};

}  // namespace

LassoPath fit_lasso_path(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                         const PathConfig& config,
                         std::vector<std::vector<double>>* sweep_objectives) {
  if (X.rows() != y.size()) throw DataError("lasso: outcome length does not match rows");
  if (names.size() != static_cast<std::size_t>(X.cols()))
    throw DataError("lasso: predictor name count does not match design");
  if (X.rows() < 2) throw DataError("lasso: need at least 2 rows");
  if (!X.allFinite() || !y.allFinite()) throw DataError("lasso: non-finite input");
  const double y_mean = y.mean();
  if ((y.array() == y[0]).all()) throw DataError("lasso: outcome has fewer than 2 distinct values");

  const detail::StandardDesign design = detail::standardize_design(X, config.standardize);
  const Vector yc = y.array() - y_mean;
  const double lmax = lambda_max_gaussian(design.X, yc);

  LassoPath path;
  path.family = Family::gaussian;
  path.predictors = names;
  path.lambda_max = lmax;
  path.x_mean = design.mean;
  path.x_scale = design.scale;
  path.excluded = design.excluded;
  path.y_mean = Vector::Constant(1, y_mean);
  path.y_scale = Vector::Ones(1);

  const auto grid = detail::resolve_grid(config, lmax, static_cast<std::size_t>(X.rows()),
                                         static_cast<std::size_t>(X.cols()));
  GaussianSolver solver(design, yc, config);
  for (double lambda : grid) {
    std::vector<double>* trace = nullptr;
    if (sweep_objectives) trace = &sweep_objectives->emplace_back();
    PathPoint pt;
    pt.lambda = lambda;
    Vector beta_std = Vector::Zero(X.cols());
    if (lambda < lmax) {
      pt.sweeps = solver.solve(lambda, trace);
      beta_std = solver.beta();
    }
    pt.coefficients = (beta_std.array() / design.scale.array()).matrix();
    pt.intercept = Vector::Constant(1, y_mean - design.mean.dot(pt.coefficients.col(0)));
    pt.n_nonzero = detail::count_nonzero_rows(pt.coefficients);
    path.points.push_back(std::move(pt));
  }
  return path;
}

LassoPath fit_lasso_path(const Dataset& d, std::string_view outcome,
                         const std::vector<std::string>& predictors, const PathConfig& config) {
  LassoPath path = fit_lasso_path(d.matrix(predictors), d.vector(outcome), predictors, config);
  path.responses = {std::string(outcome)};
  return path;
}

Vector predict_gaussian(const PathPoint& point, const Matrix& X) {
  return (X * point.coefficients.col(0)).array() + point.intercept[0];
}

double gaussian_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                          const Vector& y) {
  const PathPoint& pt = path.points.at(index);
  const Vector r = y - predict_gaussian(pt, X);
  const Vector beta_std = pt.coefficients.col(0).cwiseProduct(path.x_scale);
  return r.squaredNorm() / (2.0 * static_cast<double>(X.rows())) +
         pt.lambda * beta_std.cwiseAbs().sum();
}

double gaussian_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                              const Vector& y) {
  const PathPoint& pt = path.points.at(index);
  const Matrix Xs = detail::apply_scaling(X, path.x_mean, path.x_scale, path.excluded);
  const Vector r = y - predict_gaussian(pt, X);
  const Vector g = kernels::column_dots(Xs, r, static_cast<double>(X.rows()));
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    if (path.excluded[static_cast<std::size_t>(j)]) continue;
    const double b = pt.coefficients(j, 0);
    const double v = b == 0.0 ? std::abs(g[j]) - pt.lambda
                              : std::abs(g[j] - pt.lambda * (b > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

CvResult cv_lasso(const Matrix& X, const Vector& y, const std::vector<std::string>& names,
                  const FoldAssignment& folds, const PathConfig& config,
                  const FoldScreen& screen) {
  check_folds(folds, static_cast<std::size_t>(X.rows()));
  LassoPath full = fit_lasso_path(X, y, names, config);
  PathConfig fold_config = config;
  fold_config.lambdas = full.lambdas();
  auto losses = run_folds(folds.k, [&](int f) {
    const auto train = folds.train_rows(f);
    const auto test = folds.test_rows(f);
    const auto fd = detail::fold_design(X, names, screen, train, test);
    const LassoPath path = fit_lasso_path(fd.train, detail::take_rows(y, train), fd.names, fold_config);
    const Matrix& Xt = fd.test;
    const Vector yt = detail::take_rows(y, test);
    std::vector<double> mse;
    for (const auto& pt : path.points)
      mse.push_back((yt - predict_gaussian(pt, Xt)).squaredNorm() / static_cast<double>(test.size()));
    return mse;
  });
  CvResult cv = summarize_cv(fold_config.lambdas, losses);
  cv.path = std::move(full);
  return cv;
}

std::vector<WeightedTerm> nonzero_report(const LassoPath& path, double lambda, std::size_t top_k) {
  const PathPoint& pt = path.points[path.index_of(lambda)];
  std::vector<WeightedTerm> rows;
  for (Eigen::Index j = 0; j < pt.coefficients.rows(); ++j) {
    const double norm = pt.coefficients.row(j).norm();
    if (norm == 0.0) continue;
    const double coef = pt.coefficients.cols() == 1 ? pt.coefficients(j, 0) : norm;
    rows.push_back({path.predictors[static_cast<std::size_t>(j)], coef, norm});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const WeightedTerm& a, const WeightedTerm& b) { return a.weight > b.weight; });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

std::string nonzero_report_tsv(const std::vector<WeightedTerm>& rows) {
  std::string out = "rank\tname\tcoefficient\tabs_weight\n";
  for (std::size_t k = 0; k < rows.size(); ++k)
    out += std::to_string(k + 1) + "\t" + rows[k].name + "\t" + format_number(rows[k].coefficient) +
           "\t" + format_number(rows[k].weight) + "\n";
  return out;
}

}  // namespace sparsereg
