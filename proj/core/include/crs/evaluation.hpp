#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crs/bipartite_schemes.hpp"
#include "crs/graph.hpp"
#include "crs/sampling.hpp"

namespace crs {

struct EdgeEstimate {
  EdgeId edge = 0;
  double x = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t present = 0;  // planted, so equal to trials
  std::uint64_t selected = 0;
  double estimate = 0.0;      // Pr[e in M | e in R]
  double standard_error = 0.0;
  Interval ci{0.0, 1.0};
  std::optional<double> exact;
};

struct BalancednessReport {
  std::string scheme;
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::vector<EdgeEstimate> edges;
  double min_estimate = 1.0;
  double min_ci_low = 1.0;
  std::uint64_t invalid_matchings = 0;
  std::uint64_t unknown_subsets = 0;
};

/// Planted-edge Monte Carlo: for each probe edge (original ids; all edges with
/// x > 0 when `probe` is empty) runs the scheme on `trials` samples of R(x)
/// conditioned on the edge, using stream (seed, trial) derived by edge id.
BalancednessReport mc_balancedness(const Scheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                   unsigned threads = 1, std::span<const EdgeId> probe = {});

struct ExactEdge {
  EdgeId edge = 0;
  double x = 0.0;
  double probability = 0.0;  // Pr[e in M]
  double conditional = 0.0;  // Pr[e in M | e in R]
};

/// Exact Pr[e in M] for every original edge with x > 0 by enumerating all
/// randomness. Caps: simple <= 12 completed edges; rbg needs exact step 6;
/// karp-sipser <= 8 edges. Throws TooLarge above the caps.
std::vector<ExactEdge> exact_balancedness(const Scheme& scheme);

/// Both sides of the inequality 1 - prod(1 - F(x_i)) >= sum x_i (1 - e^{-1/e} - 1/(2e^2))
/// + sum (e^{2x_i} - e^{x_i}) / (2e^2), F(x) = (e^x - 1)/e.
std::pair<double, double> lem_bound_sides(std::span<const double> x);

struct LemBoundReport {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  double min_slack = 0.0;  // min of lhs - rhs
  std::vector<double> worst;
};

/// Random vectors with sum <= 1: scaled Dirichlet, Dirichlet on the simplex
/// boundary, a single coordinate equal to 1, and all-equal coordinates.
/// A violation is lhs < rhs - slack.
LemBoundReport check_lem_bound(std::uint64_t samples, std::uint64_t seed, double slack = 1e-12);

struct DensityReport {
  std::uint64_t trials = 0;
  std::size_t vertices = 0;
  double mean_ks = 0.0;       // mean matching size
  double mean_max = 0.0;
  double mean_gap = 0.0;      // mean(|max| - |KS|)
  double ks_per_vertex = 0.0;
  double max_per_vertex = 0.0;
  double target_per_vertex = 0.0;  // 1 - lambda - lambda^2 / 2
  bool max_computed = false;
};

/// Karp-Sipser first stage and (optionally) maximum matching sizes on R(x).
DensityReport density_experiment(const FractionalMatching& fm, std::uint64_t trials, std::uint64_t seed,
                                 unsigned threads = 1, bool with_max_matching = true);

struct ConjectureRow {
  std::size_t index = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  Interval ci{0.0, 0.0};
  bool flagged = false;  // CI entirely below the uniform matrix's CI
};

struct ConjectureReport {
  std::size_t n = 0;
  std::uint64_t trials = 0;
  ConjectureRow uniform;
  std::vector<ConjectureRow> rows;
  std::size_t flags = 0;
};

/// Monte Carlo E[maximum matching size of R(A)] for each matrix and for the
/// uniform 1/n matrix; 99% normal intervals. Flags never fail the probe.
ConjectureReport conjecture_probe(const std::vector<DoublyStochasticMatrix>& matrices, std::uint64_t trials,
                                  std::uint64_t seed, unsigned threads = 1);

struct BluePair {
  EdgeId e = 0;
  EdgeId f = 0;
  std::uint64_t both_blue = 0;
  double p_e = 0.0;   // Pr[e in R2 | both blue]
  double p_f = 0.0;
  double p_ef = 0.0;  // Pr[both in R2 | both blue]
  double se = 0.0;    // delta-method standard error of p_ef - p_e p_f
};

/// Every pair of edges sharing a right vertex, over `trials` runs of steps 1-5.
std::vector<BluePair> blue_pair_correlation(const RbgScheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                            unsigned threads = 1);

struct StageFrequencies {
  std::uint64_t trials = 0;
  // Per completed edge: counts of gray, red, blue, R1, R2, R3, matched.
  std::vector<std::uint64_t> gray, red, blue, r1, r2, r3, matched;
};

/// Unconditional per-edge stage counts over `trials` runs of the full pipeline.
StageFrequencies stage_frequencies(const RbgScheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                   unsigned threads = 1);

}  // namespace crs
