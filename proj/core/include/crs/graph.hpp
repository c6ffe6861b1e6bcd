#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crs/rng.hpp"

namespace crs {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr double kLoadTolerance = 1e-9;

struct Edge {
  VertexId u;
  VertexId v;
};

enum class Side : std::uint8_t { left = 0, right = 1 };

/// Non-owning compressed adjacency: `incidence[offsets[v] .. offsets[v+1])`
/// lists the edges at v.
struct GraphView {
  std::size_t vertex_count = 0;
  std::span<const Edge> edges;
  std::span<const std::uint32_t> offsets;
  std::span<const EdgeId> incidence;

  std::span<const EdgeId> incident(VertexId v) const {
    return incidence.subspan(offsets[v], offsets[v + 1] - offsets[v]);
  }
  VertexId other(EdgeId e, VertexId v) const {
    return edges[e].u == v ? edges[e].v : edges[e].u;
  }
};

/// Simple undirected graph with dense edge ids assigned in input order and an
/// optional left/right bipartition. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Throws InputError on self-loops, parallel edges, out-of-range endpoints,
  /// or an edge inside one side of the bipartition.
  Graph(std::size_t vertex_count, std::vector<Edge> edges,
        std::optional<std::vector<Side>> sides = std::nullopt);

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const EdgeId> incident(VertexId v) const { return view().incident(v); }
  std::size_t degree(VertexId v) const { return offsets_.at(v + 1) - offsets_[v]; }
  VertexId other(EdgeId e, VertexId v) const { return view().other(e, v); }

  bool has_bipartition() const noexcept { return sides_.has_value(); }
  Side side(VertexId v) const { return sides_.value().at(v); }
  const std::optional<std::vector<Side>>& sides() const noexcept { return sides_; }

  GraphView view() const noexcept {
    return GraphView{vertex_count_, edges_, offsets_, incidence_};
  }

 private:
  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<EdgeId> incidence_;
  std::optional<std::vector<Side>> sides_;
};

/// A proper 2-colouring (vertex 0 of each component on the left), or nullopt.
std::optional<std::vector<Side>> two_coloring(const Graph& g);

bool is_triangle_free(const Graph& g);

/// Edge weights x over a graph. Weights are not range-checked here; use
/// `validate` for diagnostics.
class FractionalMatching {
 public:
  FractionalMatching() = default;
  FractionalMatching(Graph graph, std::vector<double> x, double tolerance = kLoadTolerance);

  const Graph& graph() const noexcept { return graph_; }
  std::span<const double> x() const noexcept { return x_; }
  double x(EdgeId e) const { return x_.at(e); }
  double tolerance() const noexcept { return tolerance_; }

  double load(VertexId v) const;
  double max_weight() const;

 private:
  Graph graph_;
  std::vector<double> x_;
  double tolerance_ = kLoadTolerance;
};

struct Violation {
  enum class Kind { weight_out_of_range, vertex_overloaded };
  Kind kind;
  std::uint32_t index;  // edge id or vertex id, depending on kind
  double magnitude;     // offending weight, or load
  std::string message() const;
};

/// Empty iff every weight lies in [0,1] and every load is at most 1 + tolerance.
std::vector<Violation> validate(const FractionalMatching& fm);

/// Result of padding every deficient vertex up to load 1.
///
/// Original edge and vertex ids are preserved; dummy vertices and dummy edges
/// are appended after them, so `is_dummy(e)` is a single comparison.
struct LoadCompletion {
  FractionalMatching instance;
  std::size_t original_vertex_count = 0;
  std::size_t original_edge_count = 0;

  bool is_dummy(EdgeId e) const noexcept { return e >= original_edge_count; }
  std::size_t dummy_count() const noexcept {
    return instance.graph().edge_count() - original_edge_count;
  }
};

/// Gives each vertex with load < 1 - tolerance one fresh partner vertex joined
/// by an edge of weight 1 - load. In a bipartite instance the partner lands on
/// the opposite side. Throws InputError if `fm` fails validation.
LoadCompletion complete_loads(const FractionalMatching& fm);

/// Identity completion (no dummies); used by schemes that work on raw loads.
LoadCompletion trivial_completion(const FractionalMatching& fm);

/// n x n matrix with non-negative entries, row-major.
class DoublyStochasticMatrix {
 public:
  DoublyStochasticMatrix(std::size_t n, std::vector<double> entries);

  std::size_t n() const noexcept { return n_; }
  double operator()(std::size_t row, std::size_t col) const { return entries_[row * n_ + col]; }
  std::span<const double> entries() const noexcept { return entries_; }

  /// Largest deviation of any row or column sum from 1.
  double max_marginal_error() const;

  /// K_{n,n} with x_{ij} = a_{ij}; left vertex i is id i, right vertex j is n + j.
  FractionalMatching to_fractional_matching() const;

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

/// K_{n,n} with every weight 1/n.
FractionalMatching gen_uniform_knn(std::size_t n);

/// Convex combination of k uniformly random permutation matrices with
/// Dirichlet(1,...,1) weights.
DoublyStochasticMatrix gen_birkhoff(std::size_t n, std::size_t k, RngStream& rng);

/// Random bipartite fractional matching: each left vertex proposes up to
/// `max_degree` distinct right neighbours (right degrees are capped too),
/// weights are random and scaled so that every load is at most 1.
FractionalMatching gen_random_bipartite(std::size_t left, std::size_t right,
                                       std::size_t max_degree, RngStream& rng);

}  // namespace crs
