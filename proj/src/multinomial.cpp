#include "sparsereg/multinomial.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "solver_common.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"
#include "sparsereg/lasso.hpp"
#include "sparsereg/report.hpp"

namespace sparsereg {

Vector softmax(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector e = (logits.array() - top).exp();
  return e / e.sum();
}

Vector softmax_probs(const Vector& intercepts, const Matrix& coefficients, const Vector& x) {
  if (intercepts.size() != coefficients.cols() || x.size() != coefficients.rows())
    throw DataError("softmax_probs: dimension mismatch");
  return softmax(intercepts + coefficients.transpose() * x);
}

namespace {

Matrix row_softmax(const Matrix& eta) {
  Matrix P(eta.rows(), eta.cols());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double top = eta.row(i).maxCoeff();
    const auto e = (eta.row(i).array() - top).exp();
    P.row(i) = e / e.sum();
  }
  return P;
}

// sum_i -log p_{i,g_i} from linear predictors, via log-sum-exp.
double nll_sum(const Matrix& eta, const std::vector<int>& codes) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    const double top = eta.row(i).maxCoeff();
    const double lse = top + std::log((eta.row(i).array() - top).exp().sum());
    total += lse - eta(i, codes[static_cast<std::size_t>(i)]);
  }
  return total;
}

Matrix linear_predictor(const Vector& intercepts, const Matrix& coefficients, const Matrix& X) {
  return (X * coefficients).rowwise() + intercepts.transpose();
}

void check_codes(const std::vector<int>& codes, Eigen::Index n, Eigen::Index K) {
  if (codes.size() != static_cast<std::size_t>(n))
    throw DataError("multinomial: outcome length does not match rows");
  for (int c : codes)
    if (c < 0 || c >= K) throw DataError("multinomial: class code out of range");
}

Matrix indicator(const std::vector<int>& codes, Eigen::Index K) {
  Matrix Y = Matrix::Zero(static_cast<Eigen::Index>(codes.size()), K);
  for (std::size_t i = 0; i < codes.size(); ++i) Y(static_cast<Eigen::Index>(i), codes[i]) = 1.0;
  return Y;
}

constexpr double kMinWeight = 1e-5;

// Proximal-Newton block coordinate descent for
//   (1/n) sum_i -log p_{i,g_i} + lambda sum_jk |B_jk|
// on a centered design. Intercepts are unpenalized.
class MultinomialSolver {
 public:
  MultinomialSolver(const detail::StandardDesign& design, const std::vector<int>& codes, int K,
                    const PathConfig& config)
      : X_(design.X),
        excluded_(design.excluded),
        codes_(codes),
        Y_(indicator(codes, K)),
        n_(static_cast<double>(design.X.rows())),
        K_(K),
        config_(config),
        b0_(Vector::Zero(K)),
        B_(Matrix::Zero(design.X.cols(), K)),
        active_(static_cast<std::size_t>(design.X.cols()), 0) {
    // Null model: intercepts at the log class proportions.
    const Vector freq = Y_.colwise().mean();
    b0_ = freq.array().log();
    b0_.array() -= b0_.mean();
    eta_ = linear_predictor(b0_, B_, X_);
  }

  const Vector& intercepts() const { return b0_; }
  const Matrix& coefficients() const { return B_; }

  double null_lambda_max() const {
    const Matrix P = row_softmax(eta_);
    const Matrix G = kernels::column_dots(X_, Matrix(Y_ - P), n_);
    double top = 0.0;
    for (Eigen::Index j = 0; j < G.rows(); ++j)
      if (!excluded_[static_cast<std::size_t>(j)]) top = std::max(top, G.row(j).cwiseAbs().maxCoeff());
    return top;
  }

  long solve(double lambda, std::vector<double>* trace) {
    lambda_ = lambda;
    double floor = config_.tolerance;
    long outer = 0;
    double objective = current_objective();
    double kkt = kkt_violation();
    if (kkt <= config_.kkt_tolerance) return 0;
    for (;;) {
      if (++outer > config_.max_outer)
        throw ConvergenceError("multinomial: no convergence within " +
                                   std::to_string(config_.max_outer) + " outer iterations at lambda " +
                                   format_number(lambda_),
                               lambda_);
      // Inner solves only need to be as accurate as the outer iterate is
      // close to optimal; tighter inner solves cost more outer time than
      // they save.
      const double inner = std::max(floor, kkt);
      double max_change = 0.0;
      for (int k = 0; k < K_; ++k) max_change = std::max(max_change, update_class(k, inner, objective));
      // Intercepts are only identified up to a common shift.
      const double shift = b0_.mean();
      b0_.array() -= shift;
      eta_.array() -= shift;
      if (trace) trace->push_back(objective);
      kkt = kkt_violation();
      if (kkt <= config_.kkt_tolerance) return outer;
      if (max_change < inner) floor = std::max(std::min(floor, inner) * 0.1, 1e-15);
    }
  }

 private:
  double current_objective() const {
    return nll_sum(eta_, codes_) / n_ + lambda_ * B_.cwiseAbs().sum();
  }

  // Weighted lasso on the class-k quadratic approximation, then a
  // step-halving search that never lets the penalized objective rise.
  double update_class(int k, double tol, double& objective) {
    const Matrix P = row_softmax(eta_);
    const Vector p = P.col(k);
    const Vector w = (p.array() * (1.0 - p.array())).max(kMinWeight);
    const Vector z = eta_.col(k).array() + (Y_.col(k) - p).array() / w.array();

    const double old_b0 = b0_[k];
    const Vector old_beta = B_.col(k);
    double b0 = old_b0;
    Vector beta = old_beta;
    Vector r = z - eta_.col(k);  // working residual at the current iterate
    const double wsum = w.sum();

    std::vector<double> v(static_cast<std::size_t>(X_.cols()), 0.0);
    auto curvature = [&](Eigen::Index j) {
      double& vj = v[static_cast<std::size_t>(j)];
      if (vj == 0.0) vj = (X_.col(j).array().square() * w.array()).sum() / n_;
      return vj;
    };

    auto inner_sweep = [&](bool all) {
      double change = 0.0;
      const double d0 = (w.array() * r.array()).sum() / wsum;
      if (d0 != 0.0) {
        b0 += d0;
        r.array() -= d0;
        change = std::abs(d0);
      }
      for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        if (!active_[static_cast<std::size_t>(j)]) continue;
        if (!all && beta[j] == 0.0) continue;
        const double vj = curvature(j);
        const double g = (X_.col(j).array() * w.array() * r.array()).sum() / n_ + vj * beta[j];
        const double updated = soft_threshold(g, lambda_) / vj;
        const double delta = updated - beta[j];
        if (delta == 0.0) continue;
        beta[j] = updated;
        r -= delta * X_.col(j);
        change = std::max(change, std::abs(delta) * std::sqrt(vj));
      }
      return change;
    };

    for (int pass = 0; pass < 1000; ++pass) {
      if (inner_sweep(true) < tol) break;
      for (int a = 0; a < 1000; ++a)
        if (inner_sweep(false) < tol) break;
    }

    const double d_b0 = b0 - old_b0;
    const Vector d_beta = beta - old_beta;
    if (d_b0 == 0.0 && (d_beta.array() == 0.0).all()) return 0.0;
    Vector d_eta = Vector::Constant(X_.rows(), d_b0);
    for (Eigen::Index j = 0; j < X_.cols(); ++j)
      if (d_beta[j] != 0.0) d_eta += d_beta[j] * X_.col(j);

    const Vector eta_k = eta_.col(k);
    const double others = B_.cwiseAbs().sum() - old_beta.cwiseAbs().sum();
    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      eta_.col(k) = eta_k + t * d_eta;
      const Vector trial = old_beta + t * d_beta;
      const double obj =
          nll_sum(eta_, codes_) / n_ + lambda_ * (others + trial.cwiseAbs().sum());
      if (obj <= objective) {
        objective = obj;
        b0_[k] = old_b0 + t * d_b0;
        // Full steps land exactly on the inner solution so zeros stay zero.
        B_.col(k) = t == 1.0 ? beta : trial;
        return std::max(std::abs(t * d_b0), (t * d_beta).cwiseAbs().maxCoeff());
      }
    }
    eta_.col(k) = eta_k;
    return 0.0;
  }

  // Full KKT check. Predictors that violate it join the active set, which
  // is all the class updates sweep over.
  double kkt_violation() {
    const Matrix P = row_softmax(eta_);
    const Matrix R = Y_ - P;
    const Matrix G = kernels::column_dots(X_, R, n_);
    double worst = (R.colwise().sum() / n_).cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < G.rows(); ++j) {
      if (excluded_[static_cast<std::size_t>(j)]) continue;
      for (int k = 0; k < K_; ++k) {
        const double b = B_(j, k);
        const double viol = b == 0.0 ? std::abs(G(j, k)) - lambda_
                                     : std::abs(G(j, k) - lambda_ * (b > 0 ? 1.0 : -1.0));
        if (viol > 0.0) active_[static_cast<std::size_t>(j)] = 1;
        worst = std::max(worst, viol);
      }
    }
    return worst;
  }

  const Matrix& X_;
  const std::vector<std::uint8_t>& excluded_;
  const std::vector<int>& codes_;
  Matrix Y_;
  double n_;
  int K_;
  const PathConfig& config_;
  double lambda_ = 0.0;
  Vector b0_;
  Matrix B_;
  Matrix eta_;
  std::vector<std::uint8_t> active_;
};

Matrix standardized_coefficients(const LassoPath& path, const PathPoint& pt) {
  Matrix B = pt.coefficients;
  for (Eigen::Index j = 0; j < B.rows(); ++j) B.row(j) *= path.x_scale[j];
  return B;
}

LassoPath fit_path_codes(const Matrix& X, const std::vector<int>& codes,
                         const std::vector<std::string>& labels,
                         const std::vector<std::string>& names, const PathConfig& config,
                         std::vector<MultinomialTrace>* trace) {
  const int K = static_cast<int>(labels.size());
  if (K < 2) throw DataError("multinomial: need at least 2 classes");
  if (names.size() != static_cast<std::size_t>(X.cols()))
    throw DataError("multinomial: predictor name count does not match design");
  check_codes(codes, X.rows(), K);
  if (!X.allFinite()) throw DataError("multinomial: non-finite input");
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (int c : codes) ++counts[static_cast<std::size_t>(c)];
  for (int k = 0; k < K; ++k)
    if (counts[static_cast<std::size_t>(k)] < 2)
      throw DataError("multinomial: class '" + labels[static_cast<std::size_t>(k)] + "' has " +
                      std::to_string(counts[static_cast<std::size_t>(k)]) +
                      " observations, need at least 2");

  const detail::StandardDesign design = detail::standardize_design(X, config.standardize);
  MultinomialSolver solver(design, codes, K, config);
  const double lmax = solver.null_lambda_max();

  LassoPath path;
  path.family = Family::multinomial;
  path.predictors = names;
  path.responses = labels;
  path.lambda_max = lmax;
  path.x_mean = design.mean;
  path.x_scale = design.scale;
  path.excluded = design.excluded;
  path.y_mean = Vector::Zero(K);
  path.y_scale = Vector::Ones(K);

  const auto grid = detail::resolve_grid(config, lmax, static_cast<std::size_t>(X.rows()),
                                         static_cast<std::size_t>(X.cols()));
  for (double lambda : grid) {
    std::vector<double>* t = nullptr;
    if (trace) t = &trace->emplace_back().objective;
    PathPoint pt;
    pt.lambda = lambda;
    if (lambda < lmax) pt.sweeps = solver.solve(lambda, t);
    Matrix B = lambda < lmax ? solver.coefficients() : Matrix::Zero(X.cols(), K);
    for (Eigen::Index j = 0; j < B.rows(); ++j) B.row(j) /= design.scale[j];
    pt.intercept = solver.intercepts() - (design.mean.transpose() * B).transpose();
    pt.coefficients = std::move(B);
    pt.n_nonzero = detail::count_nonzero_rows(pt.coefficients);
    path.points.push_back(std::move(pt));
  }
  return path;
}

}  // namespace

Matrix softmax_probs(const Vector& intercepts, const Matrix& coefficients, const Matrix& X) {
  if (intercepts.size() != coefficients.cols() || X.cols() != coefficients.rows())
    throw DataError("softmax_probs: dimension mismatch");
  return row_softmax(linear_predictor(intercepts, coefficients, X));
}

double multinomial_deviance(const Vector& intercepts, const Matrix& coefficients, const Matrix& X,
                            const std::vector<int>& codes) {
  check_codes(codes, X.rows(), coefficients.cols());
  return 2.0 * nll_sum(linear_predictor(intercepts, coefficients, X), codes);
}

double multinomial_deviance(const MultinomialFit& fit, const Matrix& X,
                            const std::vector<int>& codes) {
  return multinomial_deviance(fit.intercepts, fit.coefficients, X, codes);
}

double multinomial_loss(const Vector& intercepts, const Matrix& coefficients, const Matrix& X,
                        const std::vector<int>& codes) {
  check_codes(codes, X.rows(), coefficients.cols());
  return nll_sum(linear_predictor(intercepts, coefficients, X), codes) /
         static_cast<double>(X.rows());
}

Vector multinomial_loss_gradient(const Vector& intercepts, const Matrix& coefficients,
                                 const Matrix& X, const std::vector<int>& codes) {
  check_codes(codes, X.rows(), coefficients.cols());
  const Eigen::Index K = coefficients.cols();
  const Eigen::Index p = coefficients.rows();
  const double n = static_cast<double>(X.rows());
  const Matrix R = softmax_probs(intercepts, coefficients, X) - indicator(codes, K);
  Vector g(K + p * K);
  g.head(K) = R.colwise().sum().transpose() / n;
  const Matrix GB = X.transpose() * R / n;
  for (Eigen::Index k = 0; k < K; ++k) g.segment(K + k * p, p) = GB.col(k);
  return g;
}

double multinomial_objective(const LassoPath& path, std::size_t index, const Matrix& X,
                             const std::vector<int>& codes) {
  const PathPoint& pt = path.points.at(index);
  return multinomial_loss(pt.intercept, pt.coefficients, X, codes) +
         pt.lambda * standardized_coefficients(path, pt).cwiseAbs().sum();
}

LassoPath fit_multinomial_path(const Matrix& X, const CategoricalOutcome& outcome,
                               const std::vector<std::string>& names, const PathConfig& config,
                               std::vector<MultinomialTrace>* trace) {
  return fit_path_codes(X, outcome.codes, outcome.labels, names, config, trace);
}

MultinomialFit multinomial_fit_at(const LassoPath& path, std::size_t index, const Matrix& X,
                                  const std::vector<int>& codes) {
  if (path.family != Family::multinomial)
    throw DataError("multinomial_fit_at: not a multinomial path");
  const PathPoint& pt = path.points.at(index);
  MultinomialFit fit;
  fit.labels = path.responses;
  fit.predictors = path.predictors;
  fit.lambda = pt.lambda;
  fit.intercepts = pt.intercept.array() - pt.intercept.mean();
  fit.coefficients = pt.coefficients;
  for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j) {
    if ((fit.coefficients.row(j).array() == 0.0).all()) continue;
    fit.coefficients.row(j).array() -= fit.coefficients.row(j).mean();
  }
  fit.deviance = multinomial_deviance(fit, X, codes);
  return fit;
}

double multinomial_kkt_violation(const LassoPath& path, std::size_t index, const Matrix& X,
                                 const std::vector<int>& codes) {
  const PathPoint& pt = path.points.at(index);
  const Eigen::Index K = pt.coefficients.cols();
  const double n = static_cast<double>(X.rows());
  const Matrix R = indicator(codes, K) - softmax_probs(pt.intercept, pt.coefficients, X);
  const Matrix Xs = detail::apply_scaling(X, path.x_mean, path.x_scale, path.excluded);
  const Matrix G = kernels::column_dots(Xs, R, n);
  const Matrix B = standardized_coefficients(path, pt);
  double worst = (R.colwise().sum() / n).cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < G.rows(); ++j) {
    if (path.excluded[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double b = B(j, k);
      const double v = b == 0.0 ? std::abs(G(j, k)) - pt.lambda
                                : std::abs(G(j, k) - pt.lambda * (b > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
  }
  return worst;
}

CvResult cv_multinomial(const Matrix& X, const CategoricalOutcome& outcome,
                        const std::vector<std::string>& names, const FoldAssignment& folds,
                        const PathConfig& config, const FoldScreen& screen) {
  check_folds(folds, static_cast<std::size_t>(X.rows()));
  LassoPath full = fit_multinomial_path(X, outcome, names, config);
  PathConfig fold_config = config;
  fold_config.lambdas = full.lambdas();
  auto losses = run_folds(folds.k, [&](int f) {
    const auto train = folds.train_rows(f);
    const auto test = folds.test_rows(f);
    std::vector<int> train_codes, test_codes;
    for (std::size_t r : train) train_codes.push_back(outcome.codes[r]);
    for (std::size_t r : test) test_codes.push_back(outcome.codes[r]);
    const auto fd = detail::fold_design(X, names, screen, train, test);
    const LassoPath path =
        fit_path_codes(fd.train, train_codes, outcome.labels, fd.names, fold_config, nullptr);
    const Matrix& Xt = fd.test;
    std::vector<double> dev;
    for (const auto& pt : path.points)
      dev.push_back(multinomial_deviance(pt.intercept, pt.coefficients, Xt, test_codes) /
                    static_cast<double>(test.size()));
    return dev;
  });
  CvResult cv = summarize_cv(fold_config.lambdas, losses);
  cv.path = std::move(full);
  return cv;
}

std::map<LevelPair, std::set<std::string>> pairwise_active(const MultinomialFit& fit) {
  std::map<LevelPair, std::set<std::string>> out;
  const auto K = static_cast<Eigen::Index>(fit.labels.size());
  for (Eigen::Index a = 0; a < K; ++a)
    for (Eigen::Index b = a + 1; b < K; ++b) {
      auto& names = out[LevelPair{fit.labels[static_cast<std::size_t>(a)],
                                  fit.labels[static_cast<std::size_t>(b)]}];
      for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j)
        if (fit.coefficients(j, a) != fit.coefficients(j, b))
          names.insert(fit.predictors[static_cast<std::size_t>(j)]);
    }
  return out;
}

std::set<std::string> active_predictors(const MultinomialFit& fit) {
  std::set<std::string> out;
  for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j)
    if ((fit.coefficients.row(j).array() != 0.0).any())
      out.insert(fit.predictors[static_cast<std::size_t>(j)]);
  return out;
}

GeneSets gene_sets(const std::vector<std::set<std::string>>& sets) {
  if (sets.empty()) throw DataError("gene_sets: need at least one set");
  GeneSets out;
  out.intersection = sets.front();
  for (const auto& s : sets) {
    out.union_set.insert(s.begin(), s.end());
    std::set<std::string> keep;
    std::set_intersection(out.intersection.begin(), out.intersection.end(), s.begin(), s.end(),
                          std::inserter(keep, keep.end()));
    out.intersection = std::move(keep);
  }
  return out;
}

std::string name_list(const std::set<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += n + "\n";
  return out;
}

std::string multinomial_fit_json(const MultinomialFit& fit) {
  nlohmann::ordered_json j;
  j["labels"] = fit.labels;
  j["lambda"] = fit.lambda;
  j["deviance"] = fit.deviance;
  j["intercepts"] =
      std::vector<double>(fit.intercepts.data(), fit.intercepts.data() + fit.intercepts.size());
  nlohmann::ordered_json triplets = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < fit.coefficients.rows(); ++r)
    for (Eigen::Index k = 0; k < fit.coefficients.cols(); ++k)
      if (fit.coefficients(r, k) != 0.0)
        triplets.push_back({fit.predictors[static_cast<std::size_t>(r)],
                            fit.labels[static_cast<std::size_t>(k)], fit.coefficients(r, k)});
  j["coefficients"] = triplets;
  return j.dump(2) + "\n";
}

}  // namespace sparsereg
