#include "sparsereg/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace sparsereg::kernels {

namespace {

inline double dot(const double* a, const double* b, Eigen::Index n) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void moments(const double* x, Eigen::Index n, double& mean, double& sd) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += x[i];
  mean = s / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    ss += d * d;
  }
  sd = std::sqrt(ss / static_cast<double>(n));
}

// Correlation of one column with a pre-centered y of norm y_norm.
inline double correlation(const double* x, const double* yc, double y_norm, Eigen::Index n) {
  double mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) mean += x[i];
  mean /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    sxy += d * yc[i];
    sxx += d * d;
  }
  // Relative guard: a column whose spread is rounding noise is constant.
  if (sxx <= 1e-24 * (mean * mean + 1.0) * static_cast<double>(n) || y_norm == 0.0) return 0.0;
  double r = sxy / (std::sqrt(sxx) * y_norm);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

Vector centered(const Vector& y, double& norm) {
  Vector yc = y.array() - y.mean();
  norm = yc.norm();
  return yc;
}

}  // namespace

namespace serial {

Vector column_dots(const Matrix& X, const Vector& r, double scale) {
  Vector out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    out[j] = dot(X.col(j).data(), r.data(), X.rows()) / scale;
  return out;
}

Matrix column_dots(const Matrix& X, const Matrix& R, double scale) {
  Matrix out(X.cols(), R.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index k = 0; k < R.cols(); ++k)
      out(j, k) = dot(X.col(j).data(), R.col(k).data(), X.rows()) / scale;
  return out;
}

Vector column_correlations(const Matrix& X, const Vector& y) {
  double y_norm = 0.0;
  const Vector yc = centered(y, y_norm);
  Vector out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    out[j] = correlation(X.col(j).data(), yc.data(), y_norm, X.rows());
  return out;
}

void column_moments(const Matrix& X, Vector& mean, Vector& sd) {
  mean.resize(X.cols());
  sd.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) moments(X.col(j).data(), X.rows(), mean[j], sd[j]);
}

}  // namespace serial

namespace omp {

Vector column_dots(const Matrix& X, const Vector& r, double scale) {
  Vector out(X.cols());
  const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j)
    out[j] = dot(X.col(j).data(), r.data(), X.rows()) / scale;
  return out;
}

Matrix column_dots(const Matrix& X, const Matrix& R, double scale) {
  Matrix out(X.cols(), R.cols());
  const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 0; k < R.cols(); ++k)
      out(j, k) = dot(X.col(j).data(), R.col(k).data(), X.rows()) / scale;
  return out;
}

Vector column_correlations(const Matrix& X, const Vector& y) {
  double y_norm = 0.0;
  const Vector yc = centered(y, y_norm);
  Vector out(X.cols());
  const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j)
    out[j] = correlation(X.col(j).data(), yc.data(), y_norm, X.rows());
  return out;
}

void column_moments(const Matrix& X, Vector& mean, Vector& sd) {
  mean.resize(X.cols());
  sd.resize(X.cols());
  const Eigen::Index p = X.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < p; ++j) moments(X.col(j).data(), X.rows(), mean[j], sd[j]);
}

}  // namespace omp

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace sparsereg::kernels
