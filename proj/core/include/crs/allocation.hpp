#pragma once

// Allocation with row/column disjointness constraints: a Configuration LP
// over explicit bundle columns, rounded item by item with the red/blue/gray
// bipartite scheme.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crs/bipartite_schemes.hpp"
#include "crs/rng.hpp"

namespace crs {

using ItemMask = std::uint32_t;

inline constexpr std::size_t kMaxItems = 10;

/// Pointwise maximum of additive clauses; weights indexed by item.
struct XosValuation {
  std::vector<std::vector<double>> clauses;

  double value(ItemMask bundle) const;
};

struct AllocationInstance {
  std::size_t m = 0;  // rows
  std::size_t n = 0;  // columns
  std::vector<std::string> items;
  std::vector<XosValuation> valuations;  // cell s * n + t; empty clause list is the zero valuation

  std::size_t cells() const noexcept { return m * n; }
  std::size_t item_count() const noexcept { return items.size(); }
  const XosValuation& valuation(std::size_t s, std::size_t t) const { return valuations.at(s * n + t); }

  /// Throws InputError on size mismatches, more than kMaxItems items, or
  /// negative or non-finite weights.
  void check() const;
};

struct ConfigSolution {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t item_count = 0;
  std::vector<std::vector<double>> x;  // per cell, indexed by bundle mask (empty bundle included)
  double objective = 0.0;

  /// Pr[item a in R_{st}].
  double item_marginal(std::size_t cell, std::size_t item) const;
  /// Largest violation among the cell, row and column constraints.
  double max_violation() const;
};

ConfigSolution solve_config_lp(const AllocationInstance& inst);

struct Allocation {
  std::vector<ItemMask> realized;  // R_{st} per cell
  std::vector<ItemMask> bundles;   // S_{st} per cell
  double welfare = 0.0;            // sum v_{st}(S_{st})
  double realized_value = 0.0;     // sum v_{st}(R_{st})
};

/// True when, for every item, the cells holding it share no row and no column.
bool is_disjoint(const AllocationInstance& inst, const std::vector<ItemMask>& bundles);

/// Per-item red/blue/gray schemes built once for a fixed LP solution.
/// Step-6 mode `exact` falls back to calibrated for items whose completed
/// conflict graph exceeds the exact edge cap.
class Rounder {
 public:
  Rounder(const AllocationInstance& inst, const ConfigSolution& sol, const SchemeOptions& options = {});

  /// Draws R_{st} from the cell distributions (stream rng.derive(0)) and runs
  /// item a's scheme on its conflict graph (stream rng.derive(a + 1)).
  /// Throws AssertionFailure if the result breaks disjointness.
  Allocation round(const RngStream& rng) const;

  /// Step-6 mode actually used per item; uniform for items that never appear.
  const std::vector<Step6Mode>& modes() const noexcept { return modes_; }
  std::uint64_t unknown_subsets() const;

 private:
  AllocationInstance inst_;
  std::vector<std::vector<std::pair<ItemMask, double>>> cell_atoms_;
  std::vector<std::unique_ptr<RbgScheme>> schemes_;  // null when the item has no weight
  std::vector<Step6Mode> modes_;
};

Allocation round_solution(const AllocationInstance& inst, const ConfigSolution& sol, const RngStream& rng,
                          Step6Mode mode = Step6Mode::exact);

struct RoundingReport {
  std::uint64_t roundings = 0;
  double lp_objective = 0.0;
  double mean_welfare = 0.0;
  double standard_error = 0.0;
  double mean_realized_value = 0.0;
  double ratio = 0.0;  // mean_welfare / lp_objective (1 when the LP optimum is 0)
  std::uint64_t unknown_subsets = 0;
  std::vector<Step6Mode> modes;
};

/// Rounding r uses RngStream(seed, r).
RoundingReport evaluate_rounding(const AllocationInstance& inst, const ConfigSolution& sol, std::uint64_t roundings,
                                 std::uint64_t seed, unsigned threads = 1, const SchemeOptions& options = {});

}  // namespace crs
