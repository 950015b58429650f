#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/linear.hpp"

using namespace sparsereg;

TEST(Ols, ExactLine) {
  Matrix X(10, 1);
  Vector y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = i + 1;
    y(i) = 2.0 * (i + 1);
  }
  const auto fit = fit_ols(X, y, {"x"});
  EXPECT_NEAR(fit.coefficients(1), 2.0, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(Ols, ThreePointHandSolve) {
  // Normal equations for (0,1),(1,1),(2,4): Sxx = 2, Sxy = 3, slope 1.5,
  // intercept 2 - 1.5 * 1 = 0.5.
  Matrix X(3, 1);
  X << 0, 1, 2;
  Vector y(3);
  y << 1, 1, 4;
  const auto fit = fit_ols(X, y, {"x"});
  EXPECT_NEAR(fit.coefficients(0), 0.5, 1e-12);
  EXPECT_NEAR(fit.coefficients(1), 1.5, 1e-12);
  EXPECT_EQ(fit.residual_df, 1u);
  // RSS = 1.5, sigma = sqrt(1.5); se(slope) = sigma / sqrt(Sxx)
  EXPECT_NEAR(fit.sigma, std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(fit.std_errors(1), std::sqrt(1.5 / 2.0), 1e-12);
}

TEST(Ols, MatchesPseudoInverseAndIdentities) {
  oracle::Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 1 + rng.below(8);
    const int n = p + 3 + rng.below(45 - p);
    const Matrix X = oracle::normal_matrix(rng, n, p);
    const Vector y = X * oracle::normal_vector(rng, p) + oracle::normal_vector(rng, n);
    const auto fit = fit_ols(X, y, oracle::names("x", p));
    const Vector ref = oracle::pinv_ols(X, y);
    EXPECT_LE((fit.coefficients - ref).cwiseAbs().maxCoeff(), 1e-8);
    const double adj = 1.0 - (1.0 - fit.r_squared) * (n - 1.0) / (n - p - 1.0);
    EXPECT_NEAR(fit.adjusted_r_squared, adj, 1e-14);
    EXPECT_LE(fit.adjusted_r_squared, fit.r_squared);
    EXPECT_GE(fit.r_squared, 0.0);
    EXPECT_LE(fit.r_squared, 1.0);
    for (int j = 0; j < p + 1; ++j)
      EXPECT_NEAR(fit.t_values(j), fit.coefficients(j) / fit.std_errors(j), 1e-12);
    for (int j = 0; j < p; ++j)
      EXPECT_LE(std::abs(X.col(j).dot(fit.residuals)),
                1e-8 * X.col(j).norm() * fit.residuals.norm());
  }
}

TEST(Ols, PermutationInvariance) {
  oracle::Rng rng(5);
  const Matrix X = oracle::normal_matrix(rng, 40, 4);
  const Vector y = oracle::normal_vector(rng, 40);
  Matrix Xp(40, 4);
  const int perm[] = {2, 0, 3, 1};
  for (int j = 0; j < 4; ++j) Xp.col(j) = X.col(perm[j]);
  const auto a = fit_ols(X, y, {"a", "b", "c", "d"});
  const auto b = fit_ols(Xp, y, {"c", "a", "d", "b"});
  for (int j = 0; j < 4; ++j) {
    EXPECT_NEAR(a.coefficients(perm[j] + 1), b.coefficients(j + 1), 1e-12);
    EXPECT_NEAR(a.p_values(perm[j] + 1), b.p_values(j + 1), 1e-12);
  }
}

TEST(Ols, RankDeficientNamesColumn) {
  oracle::Rng rng(8);
  Matrix X = oracle::normal_matrix(rng, 20, 3);
  X.col(2) = 2.0 * X.col(0) - X.col(1);
  const Vector y = oracle::normal_vector(rng, 20);
  try {
    fit_ols(X, y, {"a", "b", "c"});
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.columns().size(), 1u);
  }
}

TEST(Ols, TooFewRows) {
  Matrix X(2, 1);
  X << 1, 2;
  Vector y(2);
  y << 1, 3;
  EXPECT_THROW(fit_ols(X, y, {"x"}), DataError);
}

TEST(Ols, TsvLayout) {
  Matrix X(3, 1);
  X << 0, 1, 2;
  Vector y(3);
  y << 1, 1, 4;
  const std::string tsv = ols_tsv(fit_ols(X, y, {"x"}));
  EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "term\testimate\tstd_error\tt_value\tp_value");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 3);
  EXPECT_NE(tsv.find("(Intercept)\t0.5\t"), std::string::npos);
}

TEST(CorrelationFilter, DropsDuplicate) {
  Dataset d = parse_csv("a,b,c\n1,1,5\n2,2,3\n3,3,9\n4,4,1\n", Schema{});
  const auto res = correlation_filter(d, {"a", "b", "c"}, 0.98);
  EXPECT_EQ(res.retained, (std::vector<std::string>{"a", "c"}));
  ASSERT_EQ(res.dropped.size(), 1u);
  EXPECT_EQ(res.dropped[0].first, "b");
  EXPECT_EQ(res.dropped[0].second, "a");
}

TEST(CorrelationFilter, ThresholdOneKeepsNearCollinear) {
  Dataset d = parse_csv("a,b\n1,1.01\n2,2\n3,3\n4,4\n", Schema{});
  EXPECT_EQ(correlation_filter(d, {"a", "b"}, 1.0).retained.size(), 2u);
}

TEST(CorrelationFilter, IndependentNoiseKept) {
  oracle::Rng rng(31);
  std::vector<Column> cols;
  for (int j = 0; j < 10; ++j) {
    Column c;
    c.name = "x" + std::to_string(j);
    for (int i = 0; i < 200; ++i) {
      c.values.push_back(rng.normal());
      c.missing.push_back(0);
      c.text.emplace_back();
    }
    cols.push_back(c);
  }
  const Dataset d(cols);
  std::vector<std::string> all;
  for (int j = 0; j < 10; ++j) all.push_back("x" + std::to_string(j));
  EXPECT_EQ(correlation_filter(d, all, 0.98).retained, all);
}

TEST(WaldCi, Examples) {
  const auto [lo, hi] = wald_ci(0.0, 1.0, 0.95);
  EXPECT_NEAR(lo, -1.959964, 1e-5);
  EXPECT_NEAR(hi, 1.959964, 1e-5);
  const auto zero = wald_ci(5.0, 0.0, 0.95);
  EXPECT_EQ(zero.first, 5.0);
  EXPECT_EQ(zero.second, 5.0);
  const auto wide = wald_ci(1.0, 0.3, 0.99);
  const auto narrow = wald_ci(1.0, 0.3, 0.95);
  EXPECT_LT(wide.first, narrow.first);
  EXPECT_GT(wide.second, narrow.second);
}

TEST(Distributions, ReferenceValues) {
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  // t with 10 df: two-sided 0.05 critical value 2.228138851986274
  EXPECT_NEAR(t_two_sided_p(2.228138851986274, 10), 0.05, 1e-10);
}
