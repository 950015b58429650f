// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles come from tests/oracles.hpp.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sparsereg/error.hpp"
#include "sparsereg/lasso.hpp"
#include "sparsereg/linear.hpp"
#include "sparsereg/multinomial.hpp"
#include "sparsereg/multitask.hpp"
#include "sparsereg/ordinal.hpp"
#include "sparsereg/pipeline.hpp"
#include "sparsereg/report.hpp"
#include "sparsereg/screening.hpp"
#include "sparsereg/simulate.hpp"

using namespace sparsereg;
namespace fs = std::filesystem;

namespace {

// Collects failed checks for one criterion; the first few are printed.
struct Checker {
  std::vector<std::string> failures;
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CategoricalOutcome labeled(const std::vector<int>& codes, int K) {
  CategoricalOutcome out;
  for (int k = 0; k < K; ++k) out.labels.push_back("C" + std::to_string(k));
  out.codes = codes;
  return out;
}

std::vector<int> softmax_draw(oracle::Rng& rng, const Matrix& X, const Matrix& B) {
  std::vector<int> codes(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Vector eta = B.transpose() * X.row(i).transpose();
    Vector p = (eta.array() - eta.maxCoeff()).exp();
    p /= p.sum();
    double u = rng.uniform();
    int k = 0;
    while (k < p.size() - 1 && u > p(k)) u -= p(k++);
    codes[static_cast<std::size_t>(i)] = k;
  }
  return codes;
}

// ---------------------------------------------------------------- 1. OLS

void ols_oracle(Checker& c) {
  oracle::Rng rng(101);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 1 + rng.below(8);
    const int n = p + 3 + rng.below(50 - p - 2);
    const Matrix X = oracle::normal_matrix(rng, n, p) * (1.0 + 4.0 * rng.uniform());
    const Vector y = X * oracle::normal_vector(rng, p) + oracle::normal_vector(rng, n) + Vector::Constant(n, 3.0);
    const auto fit = fit_ols(X, y, oracle::names("x", static_cast<std::size_t>(p)));
    const Vector ref = oracle::pinv_ols(X, y);
    const double diff = (fit.coefficients - ref).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    c.expect(diff <= 1e-8, "instance " + std::to_string(rep) + " coefficient gap " + fmt(diff));

    const double adj = 1.0 - (1.0 - fit.r_squared) * (n - 1.0) / (n - p - 1.0);
    c.expect(fit.adjusted_r_squared == adj, "adjusted R2 identity, instance " + std::to_string(rep));
    Vector Ab(n);
    Ab = y - X * ref.tail(p) - Vector::Constant(n, ref(0));
    const double r2 = 1.0 - Ab.squaredNorm() / (y.array() - y.mean()).matrix().squaredNorm();
    c.expect(std::abs(fit.r_squared - r2) <= 1e-10, "R2 vs oracle residuals, instance " + std::to_string(rep));

    const std::string tsv = ols_tsv(fit);
    std::istringstream lines(tsv);
    std::string line;
    std::getline(lines, line);
    c.expect(line == "term\testimate\tstd_error\tt_value\tp_value", "tsv header");
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      int fields = 1;
      for (char ch : line) fields += ch == '\t';
      c.expect(fields == 5 && line.find("NA") == std::string::npos, "tsv row populated: " + line);
    }
    c.expect(rows == p + 1, "tsv row count");
  }
  c.note("max coefficient gap " + fmt(worst));
}

// ---------------------------------------------------------------- 2. ordinal

void ordinal_checks(Checker& c) {
  oracle::Rng rng(202);
  double worst_fd = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 30 + rng.below(70), p = 1 + rng.below(5), J = 2 + rng.below(5);
    const Matrix X = oracle::normal_matrix(rng, n, p);
    std::vector<int> codes(static_cast<std::size_t>(n));
    for (auto& k : codes) k = rng.below(J);
    Vector theta(J - 1);
    double t = -1.5;
    for (int j = 0; j < J - 1; ++j) theta(j) = (t += 0.2 + rng.uniform());
    const Vector beta = 0.6 * oracle::normal_vector(rng, p);
    const Vector g = ordinal_gradient(theta, beta, X, codes);
    const double h = 1e-6;
    for (int k = 0; k < J - 1 + p; ++k) {
      Vector tp = theta, tm = theta, bp = beta, bm = beta;
      if (k < J - 1) {
        tp(k) += h;
        tm(k) -= h;
      } else {
        bp(k - J + 1) += h;
        bm(k - J + 1) -= h;
      }
      const double fd =
          (ordinal_log_likelihood(tp, bp, X, codes) - ordinal_log_likelihood(tm, bm, X, codes)) / (2 * h);
      const double rel = std::abs(fd - g(k)) / std::max(1.0, std::abs(g(k)));
      worst_fd = std::max(worst_fd, rel);
      c.expect(rel <= 1e-4, "gradient instance " + std::to_string(rep) + " rel gap " + fmt(rel));
    }
  }

  double worst_closed = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int J = 2 + rng.below(5), n = 40 + rng.below(100);
    std::vector<int> codes(static_cast<std::size_t>(n));
    std::vector<double> count(static_cast<std::size_t>(J), 0.0);
    for (int i = 0; i < n; ++i) {
      codes[static_cast<std::size_t>(i)] = i < J ? i : rng.below(J);
      ++count[static_cast<std::size_t>(codes[static_cast<std::size_t>(i)])];
    }
    const auto fit = fit_ordinal(Matrix(n, 0), labeled(codes, J), {});
    double cum = 0.0;
    for (int j = 0; j < J - 1; ++j) {
      cum += count[static_cast<std::size_t>(j)] / n;
      const double gap = std::abs(fit.thresholds(j) - std::log(cum / (1.0 - cum)));
      worst_closed = std::max(worst_closed, gap);
      c.expect(gap <= 1e-8, "intercept-only threshold gap " + fmt(gap));
    }
  }

  double worst_j2 = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix X = oracle::normal_matrix(rng, 150 + 10 * rep, 3);
    Vector beta(3);
    beta << 0.8, -0.4, 0.2;
    std::vector<int> codes(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double u = rng.uniform();
      codes[static_cast<std::size_t>(i)] = X.row(i).dot(beta) + std::log(u / (1 - u)) > 0.3;
    }
    const auto fit = fit_ordinal(X, labeled(codes, 2), oracle::names("x", 3));
    const Vector ref = oracle::logistic_irls(X, codes);
    double gap = std::abs(fit.thresholds(0) + ref(0));
    for (int j = 0; j < 3; ++j) gap = std::max(gap, std::abs(fit.slopes(j) - ref(j + 1)));
    worst_j2 = std::max(worst_j2, gap);
    c.expect(gap <= 1e-6, "J=2 vs logistic gap " + fmt(gap));
  }
  c.note("gradient rel " + fmt(worst_fd) + ", closed form " + fmt(worst_closed) + ", J=2 " + fmt(worst_j2));
}

// ---------------------------------------------------------------- 3. lasso

void lasso_checks(Checker& c) {
  oracle::Rng rng(303);
  double worst_kkt = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 30 + rng.below(90), p = 3 + rng.below(80);
    Matrix X = oracle::normal_matrix(rng, n, p);
    X.col(0) = X.col(0).array() * 3.0 + 5.0;
    Vector y = oracle::normal_vector(rng, n);
    for (int j = 0; j < std::min(p, 4); ++j) y += (j % 2 ? -0.8 : 1.0) * X.col(j);
    const auto names = oracle::names("x", static_cast<std::size_t>(p));
    const auto path = fit_lasso_path(X, y, names);
    for (const auto& pt : path.points) {
      const double v = oracle::lasso_kkt(X, y, pt.intercept(0), pt.coefficients.col(0), pt.lambda);
      worst_kkt = std::max(worst_kkt, v);
      c.expect(v <= 1e-6, "KKT instance " + std::to_string(rep) + " violation " + fmt(v));
    }
    PathConfig above;
    above.lambdas = {10.0 * path.lambda_max, 1.5 * path.lambda_max, path.lambda_max};
    for (const auto& pt : fit_lasso_path(X, y, names, above).points)
      c.expect(pt.coefficients.cwiseAbs().maxCoeff() == 0.0, "nonzero at lambda >= lambda_max");
  }

  double worst_ols = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 2 + rng.below(7), n = 60 + rng.below(100);
    const Matrix X = oracle::normal_matrix(rng, n, p);
    const Vector y = X * oracle::normal_vector(rng, p) + oracle::normal_vector(rng, n);
    PathConfig cfg;
    cfg.lambda_min_ratio = 1e-7;
    const auto path = fit_lasso_path(X, y, oracle::names("x", static_cast<std::size_t>(p)), cfg);
    const Vector ref = oracle::pinv_ols(X, y);
    const auto& last = path.points.back();
    double gap = std::abs(last.intercept(0) - ref(0));
    for (int j = 0; j < p; ++j) gap = std::max(gap, std::abs(last.coefficients(j, 0) - ref(j + 1)));
    worst_ols = std::max(worst_ols, gap);
    c.expect(gap <= 1e-4, "OLS limit gap " + fmt(gap));
  }

  double worst_orth = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    // Centered orthonormal columns scaled so X'X/n = I with population sd 1.
    const int n = 20 + rng.below(40), p = 2 + rng.below(6);
    Matrix A = oracle::normal_matrix(rng, n, p);
    A = A.rowwise() - A.colwise().mean();
    const Matrix Q = Eigen::HouseholderQR<Matrix>(A).householderQ() * Matrix::Identity(n, p);
    const Matrix X = Q * std::sqrt(static_cast<double>(n));
    const Vector y = oracle::normal_vector(rng, n) * 2.0 + Vector::Constant(n, 1.0) + X.col(0);
    const Vector z = X.transpose() * (y.array() - y.mean()).matrix() / n;
    const auto path = fit_lasso_path(X, y, oracle::names("x", static_cast<std::size_t>(p)));
    for (const auto& pt : path.points)
      for (int j = 0; j < p; ++j) {
        const double gap = std::abs(pt.coefficients(j, 0) - soft_threshold(z(j), pt.lambda));
        worst_orth = std::max(worst_orth, gap);
        c.expect(gap <= 1e-8, "orthonormal closed form gap " + fmt(gap));
      }
  }
  c.note("KKT " + fmt(worst_kkt) + ", OLS limit " + fmt(worst_ols) + ", orthonormal " + fmt(worst_orth));
}

// ---------------------------------------------------------------- 4. multinomial

void multinomial_checks(Checker& c) {
  oracle::Rng rng(404);
  double worst_norm = 0.0;
  for (int rep = 0; rep < 2000; ++rep) {
    const int K = 2 + rng.below(9);
    const Vector logits = oracle::normal_vector(rng, K) * std::pow(10.0, 3.0 * rng.uniform());
    const Vector p = softmax(logits);
    worst_norm = std::max(worst_norm, std::abs(p.sum() - 1.0));
    c.expect((p.array() >= 0.0).all(), "negative probability");
  }

  int traces = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int K = 2 + rep % 4, p = 4 + rng.below(12), n = 80 + rng.below(80);
    const Matrix X = oracle::normal_matrix(rng, n, p);
    Matrix B = Matrix::Zero(p, K);
    B(0, 0) = 1.2;
    B(1, K - 1) = -1.0;
    const auto codes = softmax_draw(rng, X, B);
    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    for (int k : codes) ++counts[static_cast<std::size_t>(k)];
    if (*std::min_element(counts.begin(), counts.end()) < 2) continue;
    PathConfig cfg;
    cfg.n_lambda = 40;
    std::vector<MultinomialTrace> trace;
    const auto path = fit_multinomial_path(X, labeled(codes, K), oracle::names("x", static_cast<std::size_t>(p)),
                                           cfg, &trace);
    ++traces;
    for (const auto& t : trace)
      for (std::size_t k = 1; k < t.objective.size(); ++k)
        c.expect(t.objective[k] <= t.objective[k - 1] + 1e-12 * std::abs(t.objective[k - 1]),
                 "objective rose in instance " + std::to_string(rep));
    for (std::size_t l = 0; l < path.points.size(); l += 13) {
      const auto fit = multinomial_fit_at(path, l, X, codes);
      const Matrix P = softmax_probs(fit.intercepts, fit.coefficients, X);
      worst_norm = std::max(worst_norm, (P.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
  }
  c.expect(traces == 50, "only " + std::to_string(traces) + " of 50 descent instances usable");
  c.expect(worst_norm <= 1e-12, "softmax normalization " + fmt(worst_norm));

  double worst_k2 = 0.0;
  for (int rep = 0; rep < 4; ++rep) {
    const Matrix X = oracle::normal_matrix(rng, 150 + 25 * rep, 5);
    Matrix B = Matrix::Zero(5, 2);
    B(0, 1) = 1.2;
    B(2, 1) = -0.8;
    const auto codes = softmax_draw(rng, X, B);
    PathConfig cfg;
    cfg.n_lambda = 20;
    const auto path = fit_multinomial_path(X, labeled(codes, 2), oracle::names("x", 5), cfg);
    for (std::size_t l : {2u, 7u, 12u, 19u}) {
      const auto& pt = path.points[l];
      const Vector ref = oracle::logistic_lasso_fista(X, codes, pt.lambda);
      double gap = std::abs(pt.intercept(1) - pt.intercept(0) - ref(0));
      for (int j = 0; j < 5; ++j)
        gap = std::max(gap, std::abs(pt.coefficients(j, 1) - pt.coefficients(j, 0) - ref(j + 1)));
      worst_k2 = std::max(worst_k2, gap);
      c.expect(gap <= 1e-5, "K=2 reduction gap " + fmt(gap));
    }
  }

  double worst_null = 0.0;
  for (int K : {2, 3, 4, 6}) {
    const int n = 60 * K;
    const Matrix X = oracle::normal_matrix(rng, n, 4);
    std::vector<int> codes(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) codes[static_cast<std::size_t>(i)] = i % K;
    const auto path = fit_multinomial_path(X, labeled(codes, K), oracle::names("x", 4));
    const double gap = std::abs(multinomial_fit_at(path, 0, X, codes).deviance - 2.0 * n * std::log(K));
    worst_null = std::max(worst_null, gap);
    c.expect(gap <= 1e-3, "balanced null deviance gap " + fmt(gap));
  }
  c.note("normalization " + fmt(worst_norm) + ", K=2 " + fmt(worst_k2) + ", null deviance " + fmt(worst_null));
}

// ---------------------------------------------------------------- 5. multitask

void multitask_checks(Checker& c) {
  oracle::Rng rng(505);
  auto instance = [&](int n, int p, int m) {
    std::pair<Matrix, Matrix> in{oracle::normal_matrix(rng, n, p), oracle::normal_matrix(rng, n, m)};
    for (int k = 0; k < m; ++k) {
      in.second.col(k) += (1.0 + 0.3 * k) * in.first.col(0) - 0.7 * in.first.col(1);
      in.second.col(k) = in.second.col(k).array() * (1.0 + k) + 2.0 * k;
    }
    return in;
  };

  double worst_kkt = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 2 + rep % 4, p = 5 + rng.below(40), n = 40 + rng.below(60);
    const auto [X, Y] = instance(n, p, m);
    const auto names = oracle::names("g", static_cast<std::size_t>(p));
    const auto resp = oracle::names("r", static_cast<std::size_t>(m));
    PathConfig raw;
    raw.standardize_responses = false;
    for (const PathConfig& cfg : {raw, PathConfig{}}) {
      const auto path = fit_multitask_path(X, Y, names, resp, cfg);
      for (std::size_t l = 0; l < path.points.size(); ++l) {
        const Matrix& B = path.points[l].coefficients;
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
          const auto zeros = (B.row(j).array() == 0.0).count();
          c.expect(zeros == 0 || zeros == B.cols(), "partially zero row");
        }
        if (!cfg.standardize_responses) {
          const auto& pt = path.points[l];
          const double v = oracle::group_kkt(X, Y, pt.intercept, pt.coefficients, pt.lambda);
          worst_kkt = std::max(worst_kkt, v);
          c.expect(v <= 1e-6, "group KKT violation " + fmt(v));
        }
      }
    }
  }

  double worst_m1 = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto [X, Y] = instance(50 + 5 * rep, 12, 1);
    PathConfig cfg;
    cfg.standardize_responses = false;
    const auto names = oracle::names("g", 12);
    const auto mt = fit_multitask_path(X, Y, names, {"y"}, cfg);
    PathConfig same;
    same.lambdas = mt.lambdas();
    const auto lasso = fit_lasso_path(X, Y.col(0), names, same);
    for (std::size_t l = 0; l < mt.points.size(); ++l) {
      const double gap =
          std::max((mt.points[l].coefficients - lasso.points[l].coefficients).cwiseAbs().maxCoeff(),
                   std::abs(mt.points[l].intercept(0) - lasso.points[l].intercept(0)));
      worst_m1 = std::max(worst_m1, gap);
      c.expect(gap <= 1e-6, "m=1 reduction gap " + fmt(gap));
    }
  }

  double worst_dup = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto [X, Y] = instance(60 + 3 * rep, 10, 1);
    Matrix Y2(Y.rows(), 2);
    Y2 << Y, Y;
    for (const bool standardize : {false, true}) {
      PathConfig cfg;
      cfg.standardize_responses = standardize;
      const auto path = fit_multitask_path(X, Y2, oracle::names("g", 10), {"a", "b"}, cfg);
      for (const auto& pt : path.points) {
        const double gap = (pt.coefficients.col(0) - pt.coefficients.col(1)).cwiseAbs().maxCoeff();
        worst_dup = std::max(worst_dup, gap);
        c.expect(gap <= 1e-8, "duplicate response asymmetry " + fmt(gap));
      }
    }
  }
  c.note("group KKT " + fmt(worst_kkt) + ", m=1 " + fmt(worst_m1) + ", duplicate " + fmt(worst_dup));
}

// ---------------------------------------------------------------- 6. SIS

void sis_recovery(Checker& c) {
  // Five independent signals, each at marginal correlation 0.4 with y.
  int hits = 0;
  const std::size_t d = default_screen_size(200);
  c.expect(d == 38, "default screen size " + std::to_string(d));
  for (int seed = 0; seed < 100; ++seed) {
    oracle::Rng rng(6000 + seed);
    const Matrix X = oracle::normal_matrix(rng, 200, 1000);
    Vector y = oracle::normal_vector(rng, 200);
    for (int j = 0; j < 5; ++j) y += std::sqrt(0.8) * X.col(j * 200 + 7);
    const auto res = sis_screen(X, y, oracle::names("g", 1000), d);
    const std::set<std::string> kept(res.kept.begin(), res.kept.end());
    int found = 0;
    for (int j = 0; j < 5; ++j) found += kept.count("g" + std::to_string(j * 200 + 8)) > 0;
    hits += found == 5;
  }
  c.expect(hits >= 95, "full recovery in " + std::to_string(hits) + " of 100 seeds");
  c.note(std::to_string(hits) + "/100 seeds kept all 5 signals");
}

// ---------------------------------------------------------------- CLI helpers

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path g_scratch;

RunResult cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = g_scratch / ("stdout_" + std::to_string(counter));
  const fs::path err = g_scratch / ("stderr_" + std::to_string(counter++));
  const std::string cmd = std::string("SPARSEREG_NO_COLOR=1 '") + SPARSEREG_CLI + "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  return r;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

// Every regular file under `dir`, keyed by relative path.
std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_text_file(e.path());
  return out;
}

std::set<std::string> lines_of(const std::string& text) {
  std::set<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.insert(line);
  return out;
}

// ---------------------------------------------------------------- 7. full-size cohort

void full_size(Checker& c) {
  const fs::path dir = g_scratch / "full_size";
  fs::create_directories(dir);
  const auto sim = cli("simulate --seed 1 --out '" + (dir / "cohort").string() + "'");
  c.expect(sim.exit_code == 0, "simulate exit " + std::to_string(sim.exit_code) + ": " + sim.err);
  if (sim.exit_code != 0) return;
  const std::string data = "--input '" + (dir / "cohort/cohort.csv").string() + "' --schema '" +
                           (dir / "cohort/schema.json").string() + "' --partition '" +
                           (dir / "cohort/partition.csv").string() + "'";

  const auto shape = simulate_cohort(default_cohort_spec(), 1);
  c.expect(shape.data.n_rows() == 1631, "rows");
  c.expect(shape.partition.counts() == std::array<std::size_t, 3>{23, 11, 23}, "partition 23/11/23");
  const PipelineConfig defaults;
  c.expect(defaults.folds == 10 && defaults.imaging_folds == 4 && defaults.top_k_cognitive == 75 &&
               defaults.top_k_imaging == 50,
           "default folds and top-k");

  std::vector<double> seconds;
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run1", "run2"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = cli("pipeline " + data + " --out '" + (dir / name).string() + "'");
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    c.expect(r.exit_code == 0, std::string(name) + " exit " + std::to_string(r.exit_code) + ": " + r.err);
    c.expect(seconds.back() < 600.0, std::string(name) + " took " + fmt(seconds.back()) + " s");
    runs.push_back(tree_contents(dir / name));
  }
  const auto& a = runs[0];
  c.expect(a.count("manifest.json") && runs[1].count("manifest.json") &&
               a.at("manifest.json") == runs[1].at("manifest.json"),
           "manifest differs between reruns");
  c.expect(a == runs[1], "report trees differ between reruns");

  int screens = 0;
  for (const auto& [path, text] : a) screens += path.rfind("disease/screen_", 0) == 0;
  c.expect(screens == 6, std::to_string(screens) + " pairwise screen files");
  if (a.count("disease/union.txt") && a.count("disease/intersection.txt")) {
    const auto uni = lines_of(a.at("disease/union.txt"));
    for (const auto& g : lines_of(a.at("disease/intersection.txt")))
      c.expect(uni.count(g) > 0, "intersection gene " + g + " missing from union");
    c.note("union " + std::to_string(uni.size()) + " genes");
  } else {
    c.expect(false, "disease union/intersection files missing");
  }
  for (const char* region : {"LB", "CC", "RB"}) {
    const std::string path = std::string("imaging/") + region + "_top.tsv";
    c.expect(a.count(path) > 0, path + " missing");
    if (a.count(path)) c.expect(lines_of(a.at(path)).size() <= 51, path + " exceeds top 50");
  }
  if (a.count("cognitive/MMSE_top.tsv"))
    c.expect(lines_of(a.at("cognitive/MMSE_top.tsv")).size() <= 76, "cognitive top exceeds 75");
  c.note("runs " + fmt(seconds[0]) + " s and " + fmt(seconds[1]) + " s, " + std::to_string(a.size()) + " files");
}

// ---------------------------------------------------------------- 8. planted truth

void planted_truth(Checker& c) {
  int good = 0;
  int cross_hits = 0, cross_total = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const auto cohort = simulate_cohort(default_cohort_spec(), 800 + static_cast<std::uint64_t>(seed));
    PipelineConfig cfg;
    cfg.seed = 800 + static_cast<std::uint64_t>(seed);
    const auto cog = run_cognitive_stage(cohort.data, cfg, nullptr);
    const auto img = run_imaging_stage(cohort.data, cohort.partition, cfg, nullptr);
    const auto& cross = cohort.truth.cross_outcome_genes;
    int found = 0;
    for (const auto& g : cross) found += cog.intersection.count(g) > 0;
    cross_hits += found;
    cross_total += static_cast<int>(cross.size());
    const auto& lr = img.intersections.at("LB_RB");
    const auto& all = img.intersections.at("LB_CC_RB");
    bool hemi = true;
    for (const auto& g : cohort.truth.hemisphere_only_genes) hemi = hemi && lr.count(g) && !all.count(g);
    good += found >= 0.9 * static_cast<double>(cross.size()) && hemi;
  }
  c.expect(good >= 18, "planted structure recovered in " + std::to_string(good) + " of 20 seeds");
  c.note(std::to_string(good) + "/20 seeds; cross genes found " + std::to_string(cross_hits) + "/" +
         std::to_string(cross_total));
}

// ---------------------------------------------------------------- 9. CLI contract

void cli_contract(Checker& c) {
  const fs::path dir = g_scratch / "cli";
  fs::create_directories(dir);
  auto path = [&](const std::string& name) { return "'" + (dir / name).string() + "'"; };
  auto expect_exit = [&](const std::string& label, const RunResult& r, int code) {
    c.expect(r.exit_code == code, label + ": exit " + std::to_string(r.exit_code) + ", expected " +
                                      std::to_string(code) + " (" + r.err.substr(0, 200) + ")");
  };

  write_file(dir / "toy.csv", "y,x\n1,0\n2,1\n4,2\n");
  write_file(dir / "toy_schema.json", R"({"spec_version": 1, "roles": {"y": "outcome", "x": "predictor"}})");
  write_file(dir / "collinear.csv", "y,a,b\n1,1,2\n3,2,4\n2,3,6\n5,4,8\n4,5,10\n");
  write_file(dir / "separated.csv",
             "stage,x\nlow,0\nlow,1\nlow,2\nlow,3\nmid,4\nmid,5\nmid,6\nmid,7\nhigh,8\nhigh,9\nhigh,10\nhigh,11\n");
  write_file(dir / "bad_spec.json", R"({"spec_version": 1, "n_gene": 10})");
  write_file(dir / "bad_pipeline.json", R"({"spec_version": 1, "fold": 5})");

  // Success paths.
  expect_exit("help", cli("--help"), 0);
  const auto sim = cli("simulate --seed 3 --out " + path("sim"));
  expect_exit("simulate", sim, 0);
  for (const char* f : {"cohort.csv", "schema.json", "partition.csv", "truth.json"})
    c.expect(fs::exists(dir / "sim" / f), std::string("simulate did not write ") + f);
  const auto ols = cli("fit ols --input " + path("toy.csv") + " --schema " + path("toy_schema.json") +
                       " --outcome y --out " + path("ols"));
  expect_exit("fit ols", ols, 0);
  c.expect(lines_of(read_text_file(dir / "ols/ols.tsv")).size() == 3, "ols.tsv has header plus 2 terms");

  // Usage and configuration failures.
  const auto bad_spec = cli("simulate --config " + path("bad_spec.json") + " --out " + path("bad"));
  expect_exit("bad generator spec", bad_spec, 2);
  c.expect(bad_spec.err.find("n_gene") != std::string::npos, "bad spec message names the key");
  const auto bad_cfg = cli("pipeline --input " + path("sim/cohort.csv") + " --config " +
                           path("bad_pipeline.json") + " --out " + path("bad"));
  expect_exit("bad pipeline config", bad_cfg, 2);
  c.expect(bad_cfg.err.find("fold") != std::string::npos, "bad config message names the key");
  expect_exit("missing input", cli("fit ols --input " + path("absent.csv") + " --outcome y --out " + path("o")), 2);
  expect_exit("unknown flag", cli("fit ols --bogus"), 2);
  expect_exit("unknown subcommand", cli("frobnicate"), 2);
  expect_exit("no subcommand", cli(""), 2);
  expect_exit("absent outcome column", cli("fit ols --input " + path("toy.csv") + " --outcome z --out " + path("o")), 2);
  const auto no_part = cli("pipeline --input " + path("sim/cohort.csv") + " --schema " + path("sim/schema.json") +
                           " --skip-disease --out " + path("np"));
  expect_exit("pipeline without partition", no_part, 2);
  c.expect(no_part.err.find("FA") != std::string::npos, "missing partition message mentions FA");
  c.expect(!fs::exists(dir / "np"), "failed pipeline left an output directory");

  // Modeling failures.
  const auto sep = cli("fit ordinal --input " + path("separated.csv") +
                       " --outcome stage --levels low,mid,high --predictors x --out " + path("sep"));
  expect_exit("separated ordinal", sep, 1);
  c.expect(sep.err.find("separation") != std::string::npos, "separation message");
  const auto rank = cli("fit ols --input " + path("collinear.csv") + " --outcome y --predictors a,b --out " +
                        path("rank"));
  expect_exit("rank-deficient ols", rank, 1);
  c.expect(rank.err.find("dependent columns: a") != std::string::npos, "rank message names the column");

  // Byte-stable tables across two runs.
  const std::string cohort = "--input " + path("sim/cohort.csv") + " --schema " + path("sim/schema.json");
  const std::vector<std::pair<std::string, std::string>> golden = {
      {"ols", "fit ols " + cohort + " --outcome MMSE --predictors AGE,PTEDUCAT,APOE4,ABETA,TAU,RAVLT"},
      {"ordinal", "fit ordinal " + cohort + " --outcome DX --levels CN,EMCI,LMCI,AD --predictors MMSE,CDRSB,APOE4,AGE"},
      {"lasso", "fit lasso " + cohort + " --outcome MMSE --predictors 'GENE*' --folds 5 --seed 4"},
      {"sis", "fit sis " + cohort + " --outcome CDRSB --predictors 'GENE*'"},
      {"summary", "summarize " + cohort},
      {"pipeline", "pipeline " + cohort + " --partition " + path("sim/partition.csv") + " --skip-disease --seed 5"},
  };
  int stable = 0;
  for (const auto& [name, args] : golden) {
    std::vector<std::map<std::string, std::string>> trees;
    for (int run = 0; run < 2; ++run) {
      const std::string out = name + "_" + std::to_string(run);
      const auto r = cli(args + " --out " + path(out));
      expect_exit("golden " + name, r, 0);
      trees.push_back(tree_contents(dir / out));
    }
    int tsv = 0;
    for (const auto& [file, text] : trees[0]) tsv += file.size() > 4 && file.substr(file.size() - 4) == ".tsv";
    c.expect(tsv > 0, "golden " + name + " wrote no TSV");
    c.expect(trees[0] == trees[1], "golden " + name + " differs between runs");
    stable += tsv > 0 && trees[0] == trees[1];
  }
  c.note(std::to_string(stable) + "/" + std::to_string(golden.size()) + " golden outputs byte-stable");
}

}  // namespace

int main() {
  g_scratch = oracle::scratch_dir("acceptance");
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0 = no stated runtime bound
    std::function<void(Checker&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "OLS oracle equivalence", 10, ols_oracle},
      {2, "ordinal correctness", 30, ordinal_checks},
      {3, "lasso KKT certificate", 60, lasso_checks},
      {4, "multinomial", 0, multinomial_checks},
      {5, "multi-task group lasso", 0, multitask_checks},
      {6, "SIS recovery", 60, sis_recovery},
      {7, "pipeline at full cohort size", 0, full_size},
      {8, "planted-truth selection", 0, planted_truth},
      {9, "CLI contract", 0, cli_contract},
  };
  int failed = 0;
  for (const auto& crit : criteria) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      crit.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (crit.budget_s > 0) c.expect(s < crit.budget_s, "runtime " + fmt(s) + " s over " + fmt(crit.budget_s) + " s");
    const bool pass = c.failures.empty();
    failed += !pass;
    std::string detail;
    for (const auto& n : c.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << "criterion " << crit.id << " " << (pass ? "PASS" : "FAIL") << ": " << crit.name << " ("
              << detail << (detail.empty() ? "" : "; ") << fmt(s) << " s)\n";
    for (std::size_t k = 0; k < std::min<std::size_t>(c.failures.size(), 5); ++k)
      std::cout << "    " << c.failures[k] << "\n";
    if (c.failures.size() > 5) std::cout << "    ... " << c.failures.size() - 5 << " more\n";
    std::cout.flush();
  }
  fs::remove_all(g_scratch);
  return failed == 0 ? 0 : 1;
}
