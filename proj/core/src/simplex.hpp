#pragma once

#include <cstddef>
#include <vector>

namespace crs::detail {

/// max c^T x subject to A x <= b, x >= 0, with b >= 0 (so the origin is feasible).
/// A is row-major, rows x cols.
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Dense tableau simplex with Bland's rule. Throws Error when the LP is
/// unbounded or the pivot limit is hit.
LpSolution solve_simplex(const LinearProgram& lp, double eps = 1e-12);

}  // namespace crs::detail
