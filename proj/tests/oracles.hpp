#pragma once

// Reference computations for the test suite. Everything here is written from
// the textbook definitions, independent of the library's solvers, so a test
// that compares the two is a real cross-check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(engine); }
  double uniform() { return boost::random::uniform_01<double>()(engine); }
  int below(int k) { return std::min(k - 1, static_cast<int>(uniform() * k)); }
  std::mt19937_64 engine;
};

inline Matrix normal_matrix(Rng& rng, Eigen::Index n, Eigen::Index p) {
  Matrix X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.normal();
  return X;
}

inline Vector normal_vector(Rng& rng, Eigen::Index n) { return normal_matrix(rng, n, 1).col(0); }

inline std::vector<std::string> names(const std::string& prefix, std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < p; ++j) out.push_back(prefix + std::to_string(j + 1));
  return out;
}

/// [b0, b] = pinv([1 X]) y via SVD.
inline Vector pinv_ols(const Matrix& X, const Vector& y) {
  Matrix A(X.rows(), X.cols() + 1);
  A.col(0).setOnes();
  A.rightCols(X.cols()) = X;
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  Vector s_inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-12 * s(0)) s_inv(i) = 1.0 / s(i);
  return svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose() * y;
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Unpenalized binary logistic regression by Newton-Raphson; returns
/// [b0, b] for P(y = 1) = sigmoid(b0 + x'b).
inline Vector logistic_irls(const Matrix& X, const std::vector<int>& y) {
  const Eigen::Index n = X.rows(), p = X.cols();
  Matrix A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = X;
  Vector beta = Vector::Zero(p + 1);
  for (int it = 0; it < 100; ++it) {
    const Vector eta = A * beta;
    Vector grad = Vector::Zero(p + 1);
    Matrix H = Matrix::Zero(p + 1, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = sigmoid(eta(i));
      grad += (y[i] - mu) * A.row(i).transpose();
      H += mu * (1 - mu) * A.row(i).transpose() * A.row(i);
    }
    const Vector step = H.ldlt().solve(grad);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-14) break;
  }
  return beta;
}

/// Centered columns over population sd (or over 1 when `scale` is off).
struct Standardized {
  Matrix Z;
  Vector mean;
  Vector sd;
};

inline Standardized standardize_population(const Matrix& X, bool scale = true) {
  Standardized s;
  const double n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean().transpose();
  s.Z = X.rowwise() - s.mean.transpose();
  s.sd = (s.Z.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  if (!scale) s.sd.setOnes();
  for (Eigen::Index j = 0; j < X.cols(); ++j) s.Z.col(j) /= s.sd(j);
  return s;
}

/// Binary logistic lasso, mean negative log-likelihood + lambda ||b||_1 on
/// population-standardized X, by accelerated proximal gradient. Returns
/// [b0, b] on the original scale.
inline Vector logistic_lasso_fista(const Matrix& X, const std::vector<int>& y, double lambda,
                                   bool scale = true) {
  const auto s = standardize_population(X, scale);
  const Eigen::Index n = X.rows(), p = X.cols();
  Matrix A(n, p + 1);
  A.col(0).setOnes();
  A.rightCols(p) = s.Z;
  Vector yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[i];
  const double top = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
  const double L = 0.25 * top * top / static_cast<double>(n);
  const double step = 1.0 / L;
  auto loss_grad = [&](const Vector& b) {
    Vector mu = (A * b).unaryExpr([](double t) { return sigmoid(t); });
    return Vector(A.transpose() * (mu - yv) / static_cast<double>(n));
  };
  auto prox = [&](Vector b) {
    for (Eigen::Index j = 1; j <= p; ++j) {
      const double z = b(j), g = step * lambda;
      b(j) = z > g ? z - g : (z < -g ? z + g : 0.0);
    }
    return b;
  };
  Vector b = Vector::Zero(p + 1), prev = b, v = b;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it) {
    prev = b;
    b = prox(v - step * loss_grad(v));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = b + ((t - 1.0) / t_next) * (b - prev);
    t = t_next;
    if ((b - prev).cwiseAbs().maxCoeff() < 1e-14 && it > 10) break;
  }
  Vector out(p + 1);
  out(0) = b(0);
  for (Eigen::Index j = 0; j < p; ++j) {
    out(j + 1) = b(j + 1) / s.sd(j);
    out(0) -= out(j + 1) * s.mean(j);
  }
  return out;
}

/// Largest violation of the lasso KKT conditions for (b0, b) on the original
/// scale, evaluated on the population-standardized design.
inline double lasso_kkt(const Matrix& X, const Vector& y, double b0, const Vector& b,
                        double lambda, bool scale = true) {
  const auto s = standardize_population(X, scale);
  const double n = static_cast<double>(X.rows());
  const Vector r = y - X * b - Vector::Constant(X.rows(), b0);
  const Vector g = s.Z.transpose() * r / n;
  double worst = std::abs(r.mean());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double v = b(j) == 0.0 ? std::abs(g(j)) - lambda
                                 : std::abs(g(j) - lambda * (b(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

/// Group-lasso KKT for the unweighted multi-response objective with raw
/// (unscaled) responses.
inline double group_kkt(const Matrix& X, const Matrix& Y, const Vector& b0, const Matrix& B,
                        double lambda, bool scale = true) {
  const auto s = standardize_population(X, scale);
  const double n = static_cast<double>(X.rows());
  const Matrix R = Y - X * B - Vector::Ones(X.rows()) * b0.transpose();
  const Matrix G = s.Z.transpose() * R / n;
  double worst = R.colwise().mean().cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const Vector bj = B.row(j).transpose() * s.sd(j);
    const Vector gj = G.row(j).transpose();
    const double v = bj.norm() == 0.0 ? gj.norm() - lambda
                                      : (gj - lambda * bj / bj.norm()).cwiseAbs().maxCoeff();
    worst = std::max(worst, v);
  }
  return worst;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("sparsereg_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
