#include "simplex.hpp"

#include <cmath>
#include <limits>

#include "crs/error.hpp"

namespace crs::detail {

LpSolution solve_simplex(const LinearProgram& lp, double eps) {
  const std::size_t m = lp.rows;
  const std::size_t n = lp.cols;
  if (lp.a.size() != m * n || lp.b.size() != m || lp.c.size() != n) throw Error("simplex: malformed LP");
  for (double bi : lp.b) {
    if (bi < 0.0) throw Error("simplex: right-hand side must be non-negative");
  }

  // Tableau columns: n structural, m slack, then the right-hand side.
  const std::size_t width = n + m + 1;
  std::vector<double> t((m + 1) * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return t[r * width + c]; };
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) at(r, c) = lp.a[r * n + c];
    at(r, n + r) = 1.0;
    at(r, n + m) = lp.b[r];
  }
  // Objective row holds -c; optimal when no entry is negative.
  for (std::size_t c = 0; c < n; ++c) at(m, c) = -lp.c[c];

  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

  LpSolution out;
  const std::size_t limit = 50'000 + 100 * (n + m);
  for (;;) {
    std::size_t enter = width;
    for (std::size_t c = 0; c + 1 < width; ++c) {
      if (at(m, c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double coef = at(r, enter);
      if (coef <= eps) continue;
      const double ratio = at(r, n + m) / coef;
      if (ratio < best - eps || (ratio <= best + eps && leave < m && basis[r] < basis[leave])) {
        best = std::min(best, ratio);
        leave = r;
      }
    }
    if (leave == m) throw Error("simplex: LP is unbounded");
    if (++out.pivots > limit) throw Error("simplex: pivot limit reached");

    const double pivot = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= pivot;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
      at(r, enter) = 0.0;
    }
    basis[leave] = enter;
  }

  out.x.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) out.x[basis[r]] = std::max(0.0, at(r, n + m));
  }
  out.objective = 0.0;
  for (std::size_t c = 0; c < n; ++c) out.objective += lp.c[c] * out.x[c];
  return out;
}

}  // namespace crs::detail
