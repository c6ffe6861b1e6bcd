#include "crs/karp_sipser.hpp"

#include <algorithm>
#include <deque>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/max_cardinality_matching.hpp>

#include "crs/error.hpp"

namespace crs {

bool is_matching(const GraphView& g, std::span<const EdgeId> m) {
  std::vector<std::uint8_t> used(g.vertex_count, 0);
  for (EdgeId e : m) {
    if (e >= g.edges.size()) return false;
    const Edge& ed = g.edges[e];
    if (used[ed.u] || used[ed.v]) return false;
    used[ed.u] = used[ed.v] = 1;
  }
  return true;
}

Matching ks_first_stage(const GraphView& g, std::span<const std::uint8_t> present, RngStream& rng,
                        KsWorkspace& ws, std::vector<KsEvent>* trace) {
  const std::size_t n = g.vertex_count;
  const std::size_t m = g.edges.size();
  ws.degree.assign(n, 0);
  ws.queued.assign(n, 0);
  ws.bucket.clear();
  if (present.empty()) {
    ws.alive.assign(m, 1);
  } else {
    ws.alive.assign(present.begin(), present.end());
  }
  for (EdgeId e = 0; e < m; ++e) {
    if (!ws.alive[e]) continue;
    ++ws.degree[g.edges[e].u];
    ++ws.degree[g.edges[e].v];
  }
  for (VertexId v = 0; v < n; ++v) {
    if (ws.degree[v] == 1) {
      ws.bucket.push_back(v);
      ws.queued[v] = 1;
    }
  }

  Matching out;
  auto delete_vertex = [&](VertexId w) {
    for (EdgeId f : g.incident(w)) {
      if (!ws.alive[f]) continue;
      ws.alive[f] = 0;
      const VertexId z = g.other(f, w);
      --ws.degree[w];
      if (--ws.degree[z] == 1 && !ws.queued[z]) {
        ws.bucket.push_back(z);
        ws.queued[z] = 1;
      }
      if (trace) trace->push_back({KsEvent::Kind::removed, f, w});
    }
  };

  while (!ws.bucket.empty()) {
    // Stale entries (degree dropped to 0) are discarded on sight, so the
    // accepted draw is uniform over the current degree-1 vertices.
    const std::size_t slot = rng.uniform_index(ws.bucket.size());
    const VertexId v = ws.bucket[slot];
    ws.bucket[slot] = ws.bucket.back();
    ws.bucket.pop_back();
    if (ws.degree[v] != 1) continue;

    EdgeId e = 0;
    for (EdgeId f : g.incident(v)) {
      if (ws.alive[f]) {
        e = f;
        break;
      }
    }
    const VertexId w = g.other(e, v);
    ws.alive[e] = 0;
    --ws.degree[v];
    --ws.degree[w];
    out.push_back(e);
    if (trace) trace->push_back({KsEvent::Kind::matched, e, v});
    delete_vertex(w);
  }
  return out;
}

Matching ks_first_stage(const Graph& g, RngStream& rng) {
  KsWorkspace ws;
  return ks_first_stage(g.view(), {}, rng, ws);
}

namespace {

// BFS order from root; throws NotATree unless the graph is a spanning tree.
std::vector<VertexId> tree_order(const Graph& tree, VertexId root, std::vector<VertexId>& parent) {
  const std::size_t n = tree.vertex_count();
  if (root >= n) throw NotATree("root " + std::to_string(root) + " is not a vertex");
  if (tree.edge_count() + 1 != n) {
    throw NotATree("a tree on " + std::to_string(n) + " vertices has " + std::to_string(n - 1) +
                   " edges, got " + std::to_string(tree.edge_count()));
  }
  parent.assign(n, root);
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<VertexId> order{root};
  seen[root] = 1;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const VertexId v = order[i];
    for (EdgeId e : tree.incident(v)) {
      const VertexId w = tree.other(e, v);
      if (seen[w]) continue;
      seen[w] = 1;
      parent[w] = v;
      order.push_back(w);
    }
  }
  if (order.size() != n) throw NotATree("graph is disconnected");
  return order;
}

}  // namespace

LwLabeling lw_label(const Graph& tree, VertexId root) {
  std::vector<VertexId> parent;
  const auto order = tree_order(tree, root, parent);
  LwLabeling out{root, std::vector<LwLabel>(tree.vertex_count(), LwLabel::L)};
  std::vector<std::uint8_t> has_l_child(tree.vertex_count(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId v = *it;
    out.label[v] = has_l_child[v] ? LwLabel::W : LwLabel::L;
    if (v != root && out.label[v] == LwLabel::L) has_l_child[parent[v]] = 1;
  }
  parent[root] = root;
  out.parent = std::move(parent);
  return out;
}

LwClaimReport check_lw_claims(const Graph& tree, VertexId root, RngStream& rng, std::uint64_t runs) {
  const LwLabeling lw = lw_label(tree, root);
  const GraphView g = tree.view();
  auto is_w = [&](VertexId v) { return lw.label[v] == LwLabel::W; };

  LwClaimReport report;
  report.runs = runs;
  KsWorkspace ws;
  std::vector<KsEvent> trace;
  std::vector<std::uint8_t> matched(tree.vertex_count());
  for (std::uint64_t r = 0; r < runs; ++r) {
    trace.clear();
    std::fill(matched.begin(), matched.end(), 0);
    ks_first_stage(g, {}, rng, ws, &trace);
    for (const KsEvent& ev : trace) {
      const Edge& ed = g.edges[ev.edge];
      if (ev.kind == KsEvent::Kind::matched) {
        matched[ed.u] = matched[ed.v] = 1;
        if (is_w(ed.u) && is_w(ed.v)) ++report.ww_edge_matched;
      } else {
        const VertexId up = lw.parent[ed.u] == ed.v ? ed.v : ed.u;
        const VertexId down = up == ed.u ? ed.v : ed.u;
        if (is_w(up) && !is_w(down) && !matched[up]) ++report.wl_edge_lost;
      }
    }
    for (VertexId v = 0; v < tree.vertex_count(); ++v) {
      if (is_w(v) && !matched[v]) ++report.w_unmatched;
    }
  }
  return report;
}

Matching max_matching(const GraphView& g, std::span<const std::uint8_t> present) {
  using BGraph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS>;
  BGraph bg(g.vertex_count);
  for (EdgeId e = 0; e < g.edges.size(); ++e) {
    if (present.empty() || present[e]) boost::add_edge(g.edges[e].u, g.edges[e].v, bg);
  }
  std::vector<boost::graph_traits<BGraph>::vertex_descriptor> mate(g.vertex_count);
  boost::edmonds_maximum_cardinality_matching(bg, &mate[0]);

  Matching out;
  const auto none = boost::graph_traits<BGraph>::null_vertex();
  for (VertexId v = 0; v < g.vertex_count; ++v) {
    if (mate[v] == none || mate[v] < v) continue;
    for (EdgeId e : g.incident(v)) {
      if ((present.empty() || present[e]) && g.other(e, v) == mate[v]) {
        out.push_back(e);
        break;
      }
    }
  }
  return out;
}

Matching max_matching(const Graph& g) { return max_matching(g.view()); }

}  // namespace crs
