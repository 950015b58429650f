#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsereg/path.hpp"
#include "sparsereg/types.hpp"

namespace sparsereg::detail {

/// Design centered and scaled to unit population sd. Constant columns are
/// zeroed and flagged so the solvers hold them at zero.
struct StandardDesign {
  Matrix X;
  Vector mean;
  Vector scale;
  Vector curvature;  // x_j'x_j / n on the solver scale
  std::vector<std::uint8_t> excluded;
};

/// Centers every column; scales to unit population sd unless `scale` is off.
StandardDesign standardize_design(const Matrix& X, bool scale = true);

/// Applies a stored scaling to new rows.
Matrix apply_scaling(const Matrix& X, const Vector& mean, const Vector& scale,
                     const std::vector<std::uint8_t>& excluded);

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& rows);
Vector take_rows(const Vector& v, const std::vector<std::size_t>& rows);

/// Training and held-out designs for one CV fold, re-screened when `screen`
/// is set.
struct FoldDesign {
  Matrix train;
  Matrix test;
  std::vector<std::string> names;
};

FoldDesign fold_design(const Matrix& X, const std::vector<std::string>& names,
                       const FoldScreen& screen, const std::vector<std::size_t>& train,
                       const std::vector<std::size_t>& test);

/// The explicit grid from `config` (validated), else the default log grid.
std::vector<double> resolve_grid(const PathConfig& config, double lambda_max, std::size_t n,
                                 std::size_t p);

std::size_t count_nonzero_rows(const Matrix& B);

}  // namespace sparsereg::detail
