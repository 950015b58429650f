#include "solver_common.hpp"

#include <cmath>

#include "sparsereg/error.hpp"
#include "sparsereg/kernels.hpp"

namespace sparsereg::detail {

StandardDesign standardize_design(const Matrix& X, bool scale) {
  StandardDesign d;
  kernels::column_moments(X, d.mean, d.scale);
  d.excluded.assign(static_cast<std::size_t>(X.cols()), 0);
  d.curvature = Vector::Ones(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (d.scale[j] <= 1e-12 * (std::abs(d.mean[j]) + 1.0)) {
      d.excluded[static_cast<std::size_t>(j)] = 1;
      d.scale[j] = 1.0;
    } else if (!scale) {
      d.curvature[j] = d.scale[j] * d.scale[j];
      d.scale[j] = 1.0;
    }
  }
  d.X = apply_scaling(X, d.mean, d.scale, d.excluded);
  return d;
}

Matrix apply_scaling(const Matrix& X, const Vector& mean, const Vector& scale,
                     const std::vector<std::uint8_t>& excluded) {
  Matrix out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (excluded[static_cast<std::size_t>(j)]) out.col(j).setZero();
    else out.col(j) = (X.col(j).array() - mean[j]) / scale[j];
  }
  return out;
}

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Vector take_rows(const Vector& v, const std::vector<std::size_t>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(rows[r])];
  return out;
}

FoldDesign fold_design(const Matrix& X, const std::vector<std::string>& names,
                       const FoldScreen& screen, const std::vector<std::size_t>& train,
                       const std::vector<std::size_t>& test) {
  if (!screen) return {take_rows(X, train), take_rows(X, test), names};
  const Matrix& C = *screen.candidates;
  if (C.rows() != X.rows()) throw DataError("fold screen: candidate rows do not match the design");
  const auto cols = screen.select(train);
  FoldDesign out{Matrix(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(cols.size())),
                 Matrix(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(cols.size())),
                 {}};
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(cols[k]);
    const auto j = static_cast<Eigen::Index>(k);
    for (std::size_t r = 0; r < train.size(); ++r)
      out.train(static_cast<Eigen::Index>(r), j) = C(static_cast<Eigen::Index>(train[r]), c);
    for (std::size_t r = 0; r < test.size(); ++r)
      out.test(static_cast<Eigen::Index>(r), j) = C(static_cast<Eigen::Index>(test[r]), c);
    out.names.push_back("c" + std::to_string(cols[k]));
  }
  return out;
}

std::vector<double> resolve_grid(const PathConfig& config, double lambda_max, std::size_t n,
                                 std::size_t p) {
  if (!config.lambdas.empty()) {
    for (std::size_t k = 0; k < config.lambdas.size(); ++k) {
      if (!(config.lambdas[k] >= 0.0) || !std::isfinite(config.lambdas[k]))
        throw ConfigError("lambda values must be finite and nonnegative");
      if (k > 0 && !(config.lambdas[k] < config.lambdas[k - 1]))
        throw ConfigError("lambda sequence must be strictly decreasing");
    }
    return config.lambdas;
  }
  const double ratio =
      config.lambda_min_ratio > 0.0 ? config.lambda_min_ratio : default_min_ratio(n, p);
  return lambda_grid(lambda_max, config.n_lambda, ratio);
}

std::size_t count_nonzero_rows(const Matrix& B) {
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < B.rows(); ++j)
    if ((B.row(j).array() != 0.0).any()) ++count;
  return count;
}

}  // namespace sparsereg::detail
