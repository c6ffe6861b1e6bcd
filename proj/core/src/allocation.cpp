#include "crs/allocation.hpp"

#include <algorithm>
#include <cmath>

#include "crs/error.hpp"
#include "crs/sampling.hpp"
#include "simplex.hpp"

namespace crs {
namespace {

constexpr double kSnap = 1e-12;

bool holds(ItemMask bundle, std::size_t item) { return (bundle >> item) & 1u; }

FractionalMatching item_instance(const AllocationInstance& inst, const ConfigSolution& sol, std::size_t item) {
  std::vector<Edge> edges;
  std::vector<double> x;
  for (std::size_t s = 0; s < inst.m; ++s) {
    for (std::size_t t = 0; t < inst.n; ++t) {
      edges.push_back({static_cast<VertexId>(s), static_cast<VertexId>(inst.m + t)});
      x.push_back(std::clamp(sol.item_marginal(s * inst.n + t, item), 0.0, 1.0));
    }
  }
  std::vector<Side> sides(inst.m + inst.n, Side::left);
  std::fill(sides.begin() + static_cast<std::ptrdiff_t>(inst.m), sides.end(), Side::right);
  return FractionalMatching(Graph(inst.m + inst.n, std::move(edges), std::move(sides)), std::move(x));
}

}  // namespace

double XosValuation::value(ItemMask bundle) const {
  double best = 0.0;
  for (const auto& clause : clauses) {
    double sum = 0.0;
    for (std::size_t a = 0; a < clause.size(); ++a) {
      if (holds(bundle, a)) sum += clause[a];
    }
    best = std::max(best, sum);
  }
  return best;
}

void AllocationInstance::check() const {
  if (items.size() > kMaxItems) {
    throw InputError("allocation instances allow at most " + std::to_string(kMaxItems) + " items, got " +
                     std::to_string(items.size()));
  }
  if (valuations.size() != cells()) {
    throw InputError("expected " + std::to_string(cells()) + " cell valuations, got " +
                     std::to_string(valuations.size()));
  }
  for (std::size_t c = 0; c < valuations.size(); ++c) {
    for (const auto& clause : valuations[c].clauses) {
      if (clause.size() != items.size()) throw InputError("clause length differs from the item count");
      for (double w : clause) {
        if (!std::isfinite(w) || w < 0.0) {
          throw InputError("cell (" + std::to_string(c / n) + "," + std::to_string(c % n) +
                           ") has a negative or non-finite clause weight");
        }
      }
    }
  }
}

double ConfigSolution::item_marginal(std::size_t cell, std::size_t item) const {
  double p = 0.0;
  for (ItemMask s = 0; s < x[cell].size(); ++s) {
    if (holds(s, item)) p += x[cell][s];
  }
  return p;
}

double ConfigSolution::max_violation() const {
  double worst = 0.0;
  for (const auto& cell : x) {
    double sum = 0.0;
    for (double v : cell) {
      sum += v;
      worst = std::max(worst, -v);
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  for (std::size_t a = 0; a < item_count; ++a) {
    for (std::size_t s = 0; s < m; ++s) {
      double row = 0.0;
      for (std::size_t t = 0; t < n; ++t) row += item_marginal(s * n + t, a);
      worst = std::max(worst, row - 1.0);
    }
    for (std::size_t t = 0; t < n; ++t) {
      double col = 0.0;
      for (std::size_t s = 0; s < m; ++s) col += item_marginal(s * n + t, a);
      worst = std::max(worst, col - 1.0);
    }
  }
  return worst;
}

ConfigSolution solve_config_lp(const AllocationInstance& inst) {
  inst.check();
  const std::size_t k = inst.item_count();
  const std::size_t bundles = std::size_t{1} << k;
  const std::size_t per_cell = bundles - 1;  // the empty bundle is the slack of the cell row
  const std::size_t cells = inst.cells();

  detail::LinearProgram lp;
  lp.cols = cells * per_cell;
  lp.rows = cells + k * (inst.m + inst.n);
  lp.a.assign(lp.rows * lp.cols, 0.0);
  lp.b.assign(lp.rows, 1.0);
  lp.c.assign(lp.cols, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const std::size_t s = c / inst.n;
    const std::size_t t = c % inst.n;
    for (ItemMask b = 1; b < bundles; ++b) {
      const std::size_t col = c * per_cell + (b - 1);
      lp.c[col] = inst.valuations[c].value(b);
      lp.a[c * lp.cols + col] = 1.0;
      for (std::size_t a = 0; a < k; ++a) {
        if (!holds(b, a)) continue;
        lp.a[(cells + a * inst.m + s) * lp.cols + col] = 1.0;
        lp.a[(cells + k * inst.m + a * inst.n + t) * lp.cols + col] = 1.0;
      }
    }
  }
  const detail::LpSolution raw = detail::solve_simplex(lp);

  ConfigSolution sol;
  sol.m = inst.m;
  sol.n = inst.n;
  sol.item_count = k;
  sol.x.assign(cells, std::vector<double>(bundles, 0.0));
  for (std::size_t c = 0; c < cells; ++c) {
    double sum = 0.0;
    for (ItemMask b = 1; b < bundles; ++b) {
      double v = raw.x[c * per_cell + (b - 1)];
      if (v < kSnap) v = 0.0;
      if (v > 1.0 - kSnap) v = 1.0;
      sol.x[c][b] = v;
      sum += v;
    }
    if (sum > 1.0) {
      for (double& v : sol.x[c]) v /= sum;
      sum = 1.0;
    }
    sol.x[c][0] = 1.0 - sum;
    for (ItemMask b = 1; b < bundles; ++b) sol.objective += inst.valuations[c].value(b) * sol.x[c][b];
  }
  return sol;
}

bool is_disjoint(const AllocationInstance& inst, const std::vector<ItemMask>& bundles) {
  for (std::size_t s = 0; s < inst.m; ++s) {
    ItemMask seen = 0;
    for (std::size_t t = 0; t < inst.n; ++t) {
      if (seen & bundles[s * inst.n + t]) return false;
      seen |= bundles[s * inst.n + t];
    }
  }
  for (std::size_t t = 0; t < inst.n; ++t) {
    ItemMask seen = 0;
    for (std::size_t s = 0; s < inst.m; ++s) {
      if (seen & bundles[s * inst.n + t]) return false;
      seen |= bundles[s * inst.n + t];
    }
  }
  return true;
}

Rounder::Rounder(const AllocationInstance& inst, const ConfigSolution& sol, const SchemeOptions& options)
    : inst_(inst) {
  inst_.check();
  if (sol.m != inst.m || sol.n != inst.n || sol.item_count != inst.item_count()) {
    throw InputError("LP solution does not match the allocation instance");
  }
  for (const auto& cell : sol.x) {
    std::vector<std::pair<ItemMask, double>> atoms;
    for (ItemMask b = 0; b < cell.size(); ++b) {
      if (cell[b] > 0.0) atoms.emplace_back(b, cell[b]);
    }
    cell_atoms_.push_back(std::move(atoms));
  }
  for (std::size_t a = 0; a < inst.item_count(); ++a) {
    FractionalMatching fm = item_instance(inst, sol, a);
    if (fm.max_weight() <= 0.0) {
      schemes_.push_back(nullptr);
      modes_.push_back(Step6Mode::uniform);
      continue;
    }
    SchemeOptions opts = options;
    if (opts.step6 == Step6Mode::exact &&
        complete_loads(fm).instance.graph().edge_count() > opts.exact_edge_cap) {
      opts.step6 = Step6Mode::calibrated;
    }
    opts.calibration_seed = mix64(options.calibration_seed + a);
    schemes_.push_back(std::make_unique<RbgScheme>(fm, opts));
    modes_.push_back(opts.step6);
  }
}

std::uint64_t Rounder::unknown_subsets() const {
  std::uint64_t total = 0;
  for (const auto& s : schemes_) {
    if (s) total += s->unknown_subsets();
  }
  return total;
}

Allocation Rounder::round(const RngStream& rng) const {
  const std::size_t cells = inst_.cells();
  Allocation out;
  out.realized.assign(cells, 0);
  out.bundles.assign(cells, 0);

  RngStream cell_rng = rng.derive(0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double u = cell_rng.uniform();
    double acc = 0.0;
    for (const auto& [bundle, p] : cell_atoms_[c]) {
      acc += p;
      out.realized[c] = bundle;
      if (u < acc) break;
    }
  }

  for (std::size_t a = 0; a < schemes_.size(); ++a) {
    const RbgScheme* scheme = schemes_[a].get();
    if (!scheme) continue;
    RngStream item_rng = rng.derive(a + 1);
    const LoadCompletion& comp = scheme->completion();
    const FractionalMatching& fm = comp.instance;
    RealizedSet r(fm.graph().edge_count());
    for (EdgeId e = 0; e < comp.original_edge_count; ++e) {
      if (holds(out.realized[e], a)) r.insert(e);
    }
    for (EdgeId e = static_cast<EdgeId>(comp.original_edge_count); e < fm.graph().edge_count(); ++e) {
      if (item_rng.bernoulli(fm.x(e))) r.insert(e);
    }
    for (EdgeId e : scheme->run(r, item_rng)) out.bundles[e] |= ItemMask{1} << a;
  }

  for (std::size_t c = 0; c < cells; ++c) {
    if ((out.bundles[c] & ~out.realized[c]) != 0) {
      throw AssertionFailure("rounded bundle of cell " + std::to_string(c) + " is not a subset of its sample");
    }
    out.welfare += inst_.valuations[c].value(out.bundles[c]);
    out.realized_value += inst_.valuations[c].value(out.realized[c]);
  }
  if (!is_disjoint(inst_, out.bundles)) throw AssertionFailure("rounded allocation violates disjointness");
  return out;
}

Allocation round_solution(const AllocationInstance& inst, const ConfigSolution& sol, const RngStream& rng,
                          Step6Mode mode) {
  SchemeOptions options;
  options.step6 = mode;
  return Rounder(inst, sol, options).round(rng);
}

RoundingReport evaluate_rounding(const AllocationInstance& inst, const ConfigSolution& sol, std::uint64_t roundings,
                                 std::uint64_t seed, unsigned threads, const SchemeOptions& options) {
  const Rounder rounder(inst, sol, options);
  std::vector<double> welfare(roundings), realized(roundings);
  for_each_trial(roundings, threads, [&](std::uint64_t r, unsigned) {
    const Allocation alloc = rounder.round(RngStream(seed, r));
    welfare[r] = alloc.welfare;
    realized[r] = alloc.realized_value;
  });

  RoundingReport report;
  report.roundings = roundings;
  report.lp_objective = sol.objective;
  report.modes = rounder.modes();
  report.unknown_subsets = rounder.unknown_subsets();
  if (roundings == 0) return report;
  const double n = static_cast<double>(roundings);
  double sum = 0.0, sum_realized = 0.0;
  for (std::uint64_t r = 0; r < roundings; ++r) {
    sum += welfare[r];
    sum_realized += realized[r];
  }
  report.mean_welfare = sum / n;
  report.mean_realized_value = sum_realized / n;
  double ss = 0.0;
  for (double w : welfare) ss += (w - report.mean_welfare) * (w - report.mean_welfare);
  report.standard_error = roundings > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  report.ratio = sol.objective > 0.0 ? report.mean_welfare / sol.objective : 1.0;
  return report;
}

}  // namespace crs
