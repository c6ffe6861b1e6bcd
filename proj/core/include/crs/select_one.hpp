#pragma once

// One-element contention resolution over a small ground set.
//
// A SubsetDistribution D on 2^E and targets beta_i admit a selection rule
// with Pr[pick i] >= beta_i exactly when Pr[S meets R] >= beta(S) for every
// S. build_rule finds such a rule from a maximum s-t flow on the network
//   s -> S (capacity Pr[S]),  S -> i for i in S (unbounded),  i -> t (beta_i)
// and reads pi_i(S) = flow(S, i) / Pr[S].

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "crs/rng.hpp"

namespace crs {

using SubsetMask = std::uint32_t;

inline constexpr std::size_t kDefaultDegreeCap = 20;
inline constexpr double kMarginalTolerance = 1e-9;

class SubsetDistribution {
 public:
  /// Elements present independently with the given probabilities.
  static SubsetDistribution product(std::vector<int> ground, std::vector<double> probs);

  /// Explicit atoms; duplicate masks are merged, zero-mass atoms dropped.
  /// Throws InputError unless the masses are non-negative and sum to 1 +- 1e-9.
  static SubsetDistribution explicit_atoms(std::vector<int> ground,
                                           std::vector<std::pair<SubsetMask, double>> atoms);

  std::span<const int> ground() const noexcept { return ground_; }
  std::size_t size() const noexcept { return ground_.size(); }
  bool is_product() const noexcept { return product_; }

  /// Per-element presence probabilities (product form only).
  std::span<const double> element_probabilities() const noexcept { return probs_; }

  /// Positive-mass atoms sorted by mask. Product form expands all 2^k subsets.
  std::vector<std::pair<SubsetMask, double>> atoms() const;

  /// Pr[S meets R].
  double hit_probability(SubsetMask s) const;

 private:
  std::vector<int> ground_;
  bool product_ = false;
  std::vector<double> probs_;
  std::vector<std::pair<SubsetMask, double>> atoms_;
};

/// pi_i(S) for every positive-mass subset S; "select nothing" is the implicit
/// remainder 1 - sum_i pi_i(S). Immutable and safe to share across threads.
class SelectionRule {
 public:
  SelectionRule() = default;
  SelectionRule(std::vector<int> ground, std::vector<std::pair<SubsetMask, std::vector<double>>> rows);

  std::span<const int> ground() const noexcept { return ground_; }
  std::size_t size() const noexcept { return ground_.size(); }

  /// True if the rule was built for subset `s` (positive mass under its distribution).
  bool knows(SubsetMask s) const;

  /// pi for local element index `i` given realized subset `s`; 0 for unknown
  /// subsets or i not in s.
  double pick_probability(SubsetMask s, std::size_t i) const;

  /// Known subsets in increasing mask order.
  std::span<const SubsetMask> masks() const noexcept { return masks_; }

  /// Samples a local index from pi(s), or -1 for "nothing". Unknown and empty
  /// subsets return -1 without drawing; otherwise exactly one uniform is drawn.
  int apply_local(SubsetMask s, RngStream& rng) const;

  /// Replace the pick probabilities of a known subset (used by monotonize).
  void set_row(SubsetMask s, std::span<const double> probs);

 private:
  std::size_t row_of(SubsetMask s) const;

  std::vector<int> ground_;
  std::vector<SubsetMask> masks_;
  std::vector<std::int32_t> row_index_;  // 2^k table, -1 for unknown
  std::vector<std::uint32_t> offsets_;   // per row into probs_, sized by popcount
  std::vector<double> probs_;
};

/// Builds a rule meeting every target from a maximum flow.
/// Throws DegreeCapExceeded when |ground| > degree_cap and Infeasible (with a
/// violating witness set) when the flow value falls short of sum(beta).
SelectionRule build_rule(const SubsetDistribution& dist, std::span<const double> beta,
                         std::size_t degree_cap = kDefaultDegreeCap);

/// Element id picked from `realized`, or nullopt for "nothing" / unknown subset.
std::optional<int> apply_rule(const SelectionRule& rule, SubsetMask realized, RngStream& rng);

/// sum_S Pr[S] pi_i(S) for every local index i.
std::vector<double> achieved_marginals(const SelectionRule& rule, const SubsetDistribution& dist);

/// Smallest Pr[S meets R] - beta(S) over all S, and an S attaining it.
/// Exhaustive (k 2^k); used for diagnostics and witness recovery.
std::pair<double, SubsetMask> min_cut_slack(const SubsetDistribution& dist, std::span<const double> beta);

/// Sum over adjacent pairs S1 < S2 (|S2| = |S1| + 1) and i in S1 of
/// Pr[S1] Pr[S2] (pi_i(S2) - pi_i(S1))_+.
double adjacent_potential(const SelectionRule& rule, const SubsetDistribution& dist);

struct MonotonizeResult {
  SelectionRule rule;
  std::size_t transfers = 0;
  bool converged = false;
  double potential_before = 0.0;
  double potential_after = 0.0;
};

/// Repeated local transfers across adjacent pairs S1 < S2 until no
/// pi_i(S2) > pi_i(S1) + tol remains; marginals and per-subset totals' bounds
/// are preserved. Stops with converged = false after `transfer_cap` transfers.
MonotonizeResult monotonize(const SelectionRule& rule, const SubsetDistribution& dist,
                            std::size_t transfer_cap = 1'000'000, double tol = 1e-12);

void to_json(nlohmann::json& j, const SelectionRule& rule);

}  // namespace crs
