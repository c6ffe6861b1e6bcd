#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crs/graph.hpp"
#include "crs/karp_sipser.hpp"
#include "crs/rng.hpp"
#include "crs/sampling.hpp"

namespace crs {

struct LambdaConstants {
  double lambda = 0.0;             // root of lambda = exp(-lambda)
  double ks_prob = 0.0;            // 2(1 - lambda) - lambda^2
  double max_match_density = 0.0;  // 1 - lambda - lambda^2 / 2
  double residual = 0.0;           // |lambda - exp(-lambda)|
};

LambdaConstants solve_lambda();

inline constexpr std::size_t kDefaultNodeCap = 1'000'000;

/// Two-rooted Poisson(1) Galton-Watson tree. Vertex 0 is u, vertex 1 is v and
/// the marked edge (u, v) has id 0. Other vertices are numbered in BFS order,
/// so the children of i are the contiguous range [child_begin[i], child_begin[i+1]),
/// and edge c - 1 joins vertex c >= 2 to its parent.
struct GwTree {
  std::vector<VertexId> parent;             // parent[0] = 1, parent[1] = 0
  std::vector<std::uint32_t> child_begin;   // size node_count() + 1
  bool truncated = false;

  std::size_t node_count() const noexcept { return parent.size(); }
  Graph to_graph() const;
};

/// Grows the subtrees under u and v breadth-first, each node drawing a
/// Poisson(1) number of children by inversion. Stops with truncated = true as
/// soon as the tree would exceed `node_cap` nodes. Reuses `out`'s storage.
void sample_tree(RngStream& rng, GwTree& out, std::size_t node_cap = kDefaultNodeCap);
GwTree sample_tree(RngStream& rng, std::size_t node_cap = kDefaultNodeCap);

/// Scratch space for the tree engine below.
struct TreeKsWorkspace {
  struct Slot {
    VertexId parent;
    std::uint32_t child_begin;
    std::uint32_t child_end;
    std::uint32_t state;  // degree | alive-up-edge bit | queued bit
  };
  std::vector<Slot> slots;
  std::vector<VertexId> bucket;
};

/// Karp-Sipser first stage specialised to the BFS layout of GwTree. Consumes
/// the stream exactly as ks_first_stage does on tree.to_graph(), so both return
/// the same matching for the same stream; this one keeps each vertex's state
/// in a single record, which matters on trees with millions of nodes.
/// With `stop_at_marked` the run halts as soon as the marked edge is matched or
/// deleted; its fate is settled and the matching so far is a prefix of the full one.
Matching ks_first_stage(const GwTree& tree, RngStream& rng, TreeKsWorkspace& ws, bool stop_at_marked = false);

struct RootEdgeEstimate {
  std::uint64_t trials = 0;
  std::uint64_t truncated = 0;
  std::uint64_t used = 0;
  std::uint64_t selected = 0;
  double estimate = 0.0;
  Interval ci{0.0, 1.0};  // Wilson 99%
  double target = 0.0;    // ks_prob
};

/// Fraction of sampled trees on which the Karp-Sipser first stage matches the
/// marked edge. Tree t uses stream (seed, t); truncated trees are excluded.
RootEdgeEstimate estimate_root_edge_prob(std::uint64_t trials, std::uint64_t seed, unsigned threads = 1,
                                         std::size_t node_cap = kDefaultNodeCap);

/// Canonical form of a finite tree with the marked edge (0, 1), invariant under
/// relabelling that maps {0, 1} to itself (either orientation).
/// Throws NotATree unless `tree` is a tree containing the edge (0, 1).
std::string marked_tree_code(const Graph& tree);

/// Exact probability that the two-rooted process produces a tree isomorphic
/// (fixing the marked pair) to `tree`.
double gw_tree_probability(const Graph& tree);

/// One representative per isomorphism class of trees with at most `max_edges`
/// edges containing the marked edge (0, 1), smallest trees first.
std::vector<Graph> enumerate_marked_trees(std::size_t max_edges);

struct ComponentRow {
  std::string code;
  double gw_probability = 0.0;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double gap = 0.0;  // |frequency - gw_probability|
};

struct ComponentProbeReport {
  EdgeId edge = 0;
  std::uint64_t trials = 0;
  std::uint64_t cyclic = 0;  // component (within the size limit) contained a cycle
  std::uint64_t larger = 0;  // component grew beyond the largest listed tree
  std::vector<ComponentRow> rows;
  double max_gap = 0.0;
};

/// Conditions on `edge` in R(x) and compares the distribution of its connected
/// component with the tree process, over the listed marked trees. Components are
/// explored lazily and abandoned once larger than every listed tree.
ComponentProbeReport component_distribution_probe(const FractionalMatching& fm, EdgeId edge,
                                                  const std::vector<Graph>& trees, std::uint64_t trials,
                                                  std::uint64_t seed, unsigned threads = 1);

}  // namespace crs
