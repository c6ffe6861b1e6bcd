#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace crs::detail {

/// Dinic's algorithm on real capacities. Residual capacities at or below
/// `eps` are treated as saturated, which bounds the number of phases.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes, double eps = 1e-15);

  /// Returns the index of the forward arc.
  std::size_t add_arc(std::size_t from, std::size_t to, double capacity);

  double solve(std::size_t source, std::size_t sink);

  double flow(std::size_t arc) const { return arcs_[arc].flow; }

  /// Nodes reachable from the source in the final residual graph.
  std::vector<std::uint8_t> source_side(std::size_t source) const;

 private:
  struct Arc {
    std::size_t to;
    double capacity;
    double flow;
  };

  bool build_levels(std::size_t source, std::size_t sink);
  double push(std::size_t node, std::size_t sink, double limit);
  double residual(std::size_t arc) const { return arcs_[arc].capacity - arcs_[arc].flow; }

  double eps_;
  std::vector<Arc> arcs_;                       // arc i ^ 1 is the reverse of arc i
  std::vector<std::vector<std::size_t>> out_;   // arc ids leaving each node
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

}  // namespace crs::detail
