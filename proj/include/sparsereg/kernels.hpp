#pragma once

#include "sparsereg/types.hpp"

// Column-parallel inner loops shared by screening and the penalized solvers.
// Each kernel comes in a serial reference form and an OpenMP form. Every
// output entry is computed by one thread in a fixed summation order, so both
// forms agree bitwise regardless of thread count.

namespace sparsereg::kernels {

namespace serial {

/// out[j] = X.col(j) . r / scale
Vector column_dots(const Matrix& X, const Vector& r, double scale = 1.0);
/// out.row(j) = X.col(j)^T R / scale
Matrix column_dots(const Matrix& X, const Matrix& R, double scale = 1.0);
/// Pearson correlation of every column of X with y; 0 for constant columns.
Vector column_correlations(const Matrix& X, const Vector& y);
/// Column means and population (1/n) standard deviations.
void column_moments(const Matrix& X, Vector& mean, Vector& sd);

}  // namespace serial

namespace omp {

Vector column_dots(const Matrix& X, const Vector& r, double scale = 1.0);
Matrix column_dots(const Matrix& X, const Matrix& R, double scale = 1.0);
Vector column_correlations(const Matrix& X, const Vector& y);
void column_moments(const Matrix& X, Vector& mean, Vector& sd);

}  // namespace omp

// Dispatching entry points used by the library.
using omp::column_correlations;
using omp::column_dots;
using omp::column_moments;

/// Sets the OpenMP thread cap; n <= 0 leaves the runtime default.
void set_threads(int n);
int max_threads();

}  // namespace sparsereg::kernels
