#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crs/graph.hpp"
#include "crs/rng.hpp"

namespace crs {

/// Edge ids of a matching, in the order they were chosen.
using Matching = std::vector<EdgeId>;

/// True iff no two listed edges share a vertex and every id is in range.
bool is_matching(const GraphView& g, std::span<const EdgeId> m);

struct KsEvent {
  enum class Kind : std::uint8_t { matched, removed };
  Kind kind;
  EdgeId edge;
  VertexId cause;  // matched: the degree-1 vertex picked; removed: the matched vertex that deleted it
};

/// Scratch buffers for repeated runs; reuse avoids reallocating per run.
struct KsWorkspace {
  std::vector<std::uint32_t> degree;
  std::vector<std::uint8_t> alive;
  std::vector<std::uint8_t> queued;
  std::vector<VertexId> bucket;
};

/// Karp-Sipser first stage on the subgraph of `g` whose edges have
/// present[e] != 0 (all edges if `present` is empty). Picks a uniformly random
/// current degree-1 vertex, matches its edge, deletes both endpoints, and
/// stops when no degree-1 vertex remains. Appends to `trace` when non-null.
Matching ks_first_stage(const GraphView& g, std::span<const std::uint8_t> present, RngStream& rng,
                        KsWorkspace& ws, std::vector<KsEvent>* trace = nullptr);

Matching ks_first_stage(const Graph& g, RngStream& rng);

enum class LwLabel : std::uint8_t { L, W };

struct LwLabeling {
  VertexId root = 0;
  std::vector<LwLabel> label;
  std::vector<VertexId> parent;  // parent[root] = root
};

/// Bottom-up labeling: a vertex is L iff it has no L-child. Throws NotATree
/// unless `tree` is connected and acyclic.
LwLabeling lw_label(const Graph& tree, VertexId root);

struct LwClaimReport {
  std::uint64_t runs = 0;
  std::uint64_t wl_edge_lost = 0;    // W parent - L child edge deleted while the parent was unmatched
  std::uint64_t w_unmatched = 0;     // W vertex left unmatched at the end
  std::uint64_t ww_edge_matched = 0; // W-W edge entered the matching
  std::uint64_t violations() const { return wl_edge_lost + w_unmatched + ww_edge_matched; }
};

/// Traces `runs` executions on `tree` and counts violations of the three L/W claims.
LwClaimReport check_lw_claims(const Graph& tree, VertexId root, RngStream& rng, std::uint64_t runs);

/// Maximum-cardinality matching of the present subgraph (Edmonds' blossom algorithm).
Matching max_matching(const GraphView& g, std::span<const std::uint8_t> present = {});

Matching max_matching(const Graph& g);

}  // namespace crs
