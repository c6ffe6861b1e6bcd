#include "crs/gw_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "crs/error.hpp"
#include "crs/karp_sipser.hpp"

namespace crs {

LambdaConstants solve_lambda() {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mid - std::exp(-mid) < 0.0 ? lo : hi) = mid;
  }
  double l = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) l -= (l - std::exp(-l)) / (1.0 + std::exp(-l));
  LambdaConstants c;
  c.lambda = l;
  c.ks_prob = 2.0 * (1.0 - l) - l * l;
  c.max_match_density = 1.0 - l - 0.5 * l * l;
  c.residual = std::abs(l - std::exp(-l));
  return c;
}

namespace {

// Inversion against a precomputed CDF; the tail loop only runs for u beyond
// the last tabulated value, which double precision almost never produces.
struct PoissonOneTable {
  static constexpr std::uint32_t kSize = 24;
  double cdf[kSize];
  PoissonOneTable() {
    double p = std::exp(-1.0);
    double c = 0.0;
    for (std::uint32_t k = 0; k < kSize; ++k) {
      c += p;
      cdf[k] = c;
      p /= k + 1;
    }
  }
};

std::uint32_t poisson_one(RngStream& rng) {
  static const PoissonOneTable table;
  const double u = rng.uniform();
  std::uint32_t k = 0;
  while (k < PoissonOneTable::kSize && u >= table.cdf[k]) ++k;
  return k;
}

}  // namespace

Graph GwTree::to_graph() const {
  std::vector<Edge> edges{{0, 1}};
  edges.reserve(parent.size() - 1);
  for (VertexId c = 2; c < parent.size(); ++c) edges.push_back({parent[c], c});
  return Graph(parent.size(), std::move(edges));
}

void sample_tree(RngStream& rng, GwTree& out, std::size_t node_cap) {
  out.parent.assign({1, 0});
  out.child_begin.assign({2});
  out.truncated = false;
  std::size_t i = 0;
  for (; i < out.parent.size(); ++i) {
    const std::uint32_t k = poisson_one(rng);
    if (out.parent.size() + k > node_cap) {
      out.truncated = true;
      break;
    }
    out.parent.insert(out.parent.end(), k, static_cast<VertexId>(i));
    out.child_begin.push_back(static_cast<std::uint32_t>(out.parent.size()));
  }
  // Nodes never expanded (only after truncation) are leaves.
  out.child_begin.resize(out.parent.size() + 1, static_cast<std::uint32_t>(out.parent.size()));
}

GwTree sample_tree(RngStream& rng, std::size_t node_cap) {
  GwTree t;
  sample_tree(rng, t, node_cap);
  return t;
}

Matching ks_first_stage(const GwTree& tree, RngStream& rng, TreeKsWorkspace& ws, bool stop_at_marked) {
  constexpr std::uint32_t kDegree = (1u << 30) - 1;
  constexpr std::uint32_t kAliveUp = 1u << 30;
  constexpr std::uint32_t kQueued = 1u << 31;
  const std::size_t n = tree.node_count();
  auto& s = ws.slots;
  s.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    s[v] = {tree.parent[v], tree.child_begin[v], tree.child_begin[v + 1],
            (tree.child_begin[v + 1] - tree.child_begin[v]) + 1 + (v >= 1 ? kAliveUp : 0)};
  }
  // Slot 1 owns the marked edge, shared with vertex 0.
  auto up_owner = [](VertexId v) { return v == 0 ? VertexId{1} : v; };
  ws.bucket.clear();
  for (VertexId v = 0; v < n; ++v) {
    if ((s[v].state & kDegree) == 1) {
      ws.bucket.push_back(v);
      s[v].state |= kQueued;
    }
  }
  auto drop_degree = [&](VertexId z) {
    --s[z].state;
    if ((s[z].state & (kDegree | kQueued)) == 1) {
      ws.bucket.push_back(z);
      s[z].state |= kQueued;
    }
  };

  Matching out;
  while (!ws.bucket.empty()) {
    if (stop_at_marked && !(s[1].state & kAliveUp)) break;
    const std::size_t slot = rng.uniform_index(ws.bucket.size());
    const VertexId v = ws.bucket[slot];
    ws.bucket[slot] = ws.bucket.back();
    ws.bucket.pop_back();
    if ((s[v].state & kDegree) != 1) continue;

    VertexId owner = up_owner(v);
    VertexId w = s[v].parent;
    if (!(s[owner].state & kAliveUp)) {
      for (owner = s[v].child_begin; !(s[owner].state & kAliveUp); ++owner) {
      }
      w = owner;
    }
    s[owner].state &= ~kAliveUp;
    --s[v].state;
    --s[w].state;
    out.push_back(owner - 1);

    // Delete w: its up edge first, then its children, as in edge-id order.
    const VertexId wo = up_owner(w);
    if (s[wo].state & kAliveUp) {
      s[wo].state &= ~kAliveUp;
      --s[w].state;
      drop_degree(s[w].parent);
    }
    for (VertexId c = s[w].child_begin; c < s[w].child_end; ++c) {
      if (!(s[c].state & kAliveUp)) continue;
      s[c].state &= ~kAliveUp;
      --s[w].state;
      drop_degree(c);
    }
  }
  return out;
}

RootEdgeEstimate estimate_root_edge_prob(std::uint64_t trials, std::uint64_t seed, unsigned threads,
                                         std::size_t node_cap) {
  threads = std::max(1u, threads);
  struct Worker {
    GwTree tree;
    TreeKsWorkspace ws;
    std::uint64_t truncated = 0;
    std::uint64_t selected = 0;
  };
  std::vector<Worker> workers(threads);
  for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
    Worker& wk = workers[w];
    RngStream rng(seed, t);
    sample_tree(rng, wk.tree, node_cap);
    if (wk.tree.truncated) {
      ++wk.truncated;
      return;
    }
    const Matching m = ks_first_stage(wk.tree, rng, wk.ws, true);
    if (std::find(m.begin(), m.end(), EdgeId{0}) != m.end()) ++wk.selected;
  });

  RootEdgeEstimate r;
  r.trials = trials;
  for (const Worker& wk : workers) {
    r.truncated += wk.truncated;
    r.selected += wk.selected;
  }
  r.used = trials - r.truncated;
  r.estimate = r.used ? static_cast<double>(r.selected) / static_cast<double>(r.used) : 0.0;
  r.ci = wilson_interval(r.selected, r.used);
  r.target = solve_lambda().ks_prob;
  return r;
}

namespace {

// Checks tree shape and the marked edge; returns the BFS order rooted at 0
// with the marked edge removed from consideration (side 0 first, then side 1).
struct MarkedSides {
  std::vector<VertexId> parent;
  std::vector<VertexId> order;  // parents before children
};

MarkedSides split_marked(const Graph& tree) {
  const std::size_t n = tree.vertex_count();
  if (n < 2 || tree.edge_count() + 1 != n) throw NotATree("marked tree needs n >= 2 vertices and n - 1 edges");
  bool has_mark = false;
  for (EdgeId e : tree.incident(0)) has_mark |= tree.other(e, 0) == 1;
  if (!has_mark) throw NotATree("marked tree must contain the edge (0, 1)");
  MarkedSides s;
  s.parent.assign(n, 0);
  std::vector<std::uint8_t> seen(n, 0);
  seen[0] = seen[1] = 1;
  s.parent[0] = 1;
  s.parent[1] = 0;
  s.order = {0, 1};
  for (std::size_t i = 0; i < s.order.size(); ++i) {
    const VertexId v = s.order[i];
    for (EdgeId e : tree.incident(v)) {
      const VertexId w = tree.other(e, v);
      if (seen[w]) continue;
      seen[w] = 1;
      s.parent[w] = v;
      s.order.push_back(w);
    }
  }
  if (s.order.size() != n) throw NotATree("marked tree is disconnected");
  return s;
}

// AHU codes of every rooted subtree, computed bottom-up.
std::vector<std::string> rooted_codes(const Graph& tree, const MarkedSides& s) {
  const std::size_t n = tree.vertex_count();
  std::vector<std::vector<std::string>> kids(n);
  std::vector<std::string> code(n);
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const VertexId v = *it;
    std::sort(kids[v].begin(), kids[v].end());
    std::string c = "(";
    for (const auto& k : kids[v]) c += k;
    c += ")";
    code[v] = std::move(c);
    if (v > 1) kids[s.parent[v]].push_back(code[v]);
  }
  return code;
}

}  // namespace

std::string marked_tree_code(const Graph& tree) {
  const MarkedSides s = split_marked(tree);
  const auto code = rooted_codes(tree, s);
  const auto& [a, b] = std::minmax(code[0], code[1]);
  return a + "|" + b;
}

double gw_tree_probability(const Graph& tree) {
  const MarkedSides s = split_marked(tree);
  const auto code = rooted_codes(tree, s);
  const std::size_t n = tree.vertex_count();
  std::vector<double> prob(n, 0.0);
  std::vector<std::vector<VertexId>> kids(n);
  for (VertexId v = 2; v < n; ++v) kids[s.parent[v]].push_back(v);
  for (auto it = s.order.rbegin(); it != s.order.rend(); ++it) {
    const VertexId v = *it;
    std::map<std::string, std::pair<int, double>> groups;
    for (VertexId c : kids[v]) {
      auto& g = groups[code[c]];
      ++g.first;
      g.second = prob[c];
    }
    double p = std::exp(-1.0);
    for (const auto& [key, g] : groups) p *= std::pow(g.second, g.first) / std::tgamma(g.first + 1.0);
    prob[v] = p;
  }
  return code[0] == code[1] ? prob[0] * prob[1] : 2.0 * prob[0] * prob[1];
}

ComponentProbeReport component_distribution_probe(const FractionalMatching& fm, EdgeId edge,
                                                  const std::vector<Graph>& trees, std::uint64_t trials,
                                                  std::uint64_t seed, unsigned threads) {
  const Graph& g = fm.graph();
  if (edge >= g.edge_count()) throw InputError("probe edge " + std::to_string(edge) + " does not exist");
  if (!(fm.x(edge) > 0.0)) throw EdgeNeverAppears(edge);

  ComponentProbeReport report;
  report.edge = edge;
  report.trials = trials;
  std::map<std::string, std::size_t> row_of;
  std::size_t limit = 2;
  for (const Graph& t : trees) {
    const std::string code = marked_tree_code(t);
    limit = std::max(limit, t.vertex_count());
    if (row_of.count(code)) continue;
    row_of[code] = report.rows.size();
    report.rows.push_back({code, gw_tree_probability(t), 0, 0.0, 0.0});
  }

  threads = std::max(1u, threads);
  struct Worker {
    std::vector<std::int8_t> state;      // -1 undecided, 0 absent, 1 in component
    std::vector<std::int32_t> local;     // global vertex -> local id, -1 if undiscovered
    std::vector<EdgeId> touched_edges;
    std::vector<VertexId> touched_vertices;
    std::vector<std::uint64_t> counts;
    std::uint64_t cyclic = 0;
    std::uint64_t larger = 0;
  };
  std::vector<Worker> workers(threads);
  for (auto& w : workers) {
    w.state.assign(g.edge_count(), -1);
    w.local.assign(g.vertex_count(), -1);
    w.counts.assign(report.rows.size(), 0);
  }

  for_each_trial(trials, threads, [&](std::uint64_t t, unsigned wi) {
    Worker& w = workers[wi];
    RngStream rng(seed, t);
    std::vector<Edge> comp{{0, 1}};
    std::vector<VertexId> queue{g.edge(edge).u, g.edge(edge).v};
    w.state[edge] = 1;
    w.touched_edges.push_back(edge);
    w.local[queue[0]] = 0;
    w.local[queue[1]] = 1;
    w.touched_vertices.assign(queue.begin(), queue.end());
    enum { open, cycle, big } outcome = open;
    for (std::size_t i = 0; i < queue.size() && outcome == open; ++i) {
      const VertexId v = queue[i];
      for (EdgeId f : g.incident(v)) {
        if (w.state[f] >= 0) continue;
        w.touched_edges.push_back(f);
        w.state[f] = rng.uniform() < fm.x(f) ? 1 : 0;
        if (!w.state[f]) continue;
        const VertexId z = g.other(f, v);
        if (w.local[z] >= 0) {
          outcome = cycle;
          break;
        }
        w.local[z] = static_cast<std::int32_t>(queue.size());
        w.touched_vertices.push_back(z);
        comp.push_back({static_cast<VertexId>(w.local[v]), static_cast<VertexId>(queue.size())});
        queue.push_back(z);
        if (queue.size() > limit) {
          outcome = big;
          break;
        }
      }
    }
    if (outcome == cycle) {
      ++w.cyclic;
    } else if (outcome == big) {
      ++w.larger;
    } else {
      const auto it = row_of.find(marked_tree_code(Graph(queue.size(), comp)));
      if (it != row_of.end()) ++w.counts[it->second];
    }
    for (EdgeId f : w.touched_edges) w.state[f] = -1;
    for (VertexId v : w.touched_vertices) w.local[v] = -1;
    w.touched_edges.clear();
  });

  for (const Worker& w : workers) {
    report.cyclic += w.cyclic;
    report.larger += w.larger;
    for (std::size_t r = 0; r < report.rows.size(); ++r) report.rows[r].count += w.counts[r];
  }
  for (auto& row : report.rows) {
    row.frequency = trials ? static_cast<double>(row.count) / static_cast<double>(trials) : 0.0;
    row.gap = std::abs(row.frequency - row.gw_probability);
    report.max_gap = std::max(report.max_gap, row.gap);
  }
  return report;
}

std::vector<Graph> enumerate_marked_trees(std::size_t max_edges) {
  std::vector<Graph> out;
  std::map<std::string, std::size_t> seen;
  std::vector<std::vector<Edge>> frontier{{Edge{0, 1}}};
  while (!frontier.empty()) {
    std::vector<std::vector<Edge>> next;
    for (const auto& edges : frontier) {
      Graph g(edges.size() + 1, edges);
      if (!seen.emplace(marked_tree_code(g), out.size()).second) continue;
      out.push_back(g);
      if (edges.size() >= max_edges) continue;
      for (VertexId v = 0; v <= edges.size(); ++v) {
        auto grown = edges;
        grown.push_back({v, static_cast<VertexId>(edges.size() + 1)});
        next.push_back(std::move(grown));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace crs
