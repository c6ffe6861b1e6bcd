#include "crs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "crs/error.hpp"

namespace crs {

Graph::Graph(std::size_t vertex_count, std::vector<Edge> edges,
             std::optional<std::vector<Side>> sides)
    : vertex_count_(vertex_count), edges_(std::move(edges)), sides_(std::move(sides)) {
  if (sides_ && sides_->size() != vertex_count_) {
    throw InputError("bipartition has " + std::to_string(sides_->size()) + " entries for " +
                     std::to_string(vertex_count_) + " vertices");
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  std::vector<std::uint32_t> degree(vertex_count_, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto [u, v] = edges_[i];
    if (u >= vertex_count_ || v >= vertex_count_) {
      throw InputError("edge " + std::to_string(i) + " has an endpoint outside [0, " +
                       std::to_string(vertex_count_) + ")");
    }
    if (u == v) throw InputError("edge " + std::to_string(i) + " is a self-loop");
    const std::uint64_t key = (std::uint64_t{std::min(u, v)} << 32) | std::max(u, v);
    if (!seen.insert(key).second) {
      throw InputError("edge " + std::to_string(i) + " duplicates an earlier edge (" +
                       std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    if (sides_ && (*sides_)[u] == (*sides_)[v]) {
      throw InputError("edge " + std::to_string(i) + " joins two vertices on the same side");
    }
    ++degree[u];
    ++degree[v];
  }
  offsets_.assign(vertex_count_ + 1, 0);
  for (std::size_t v = 0; v < vertex_count_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  incidence_.resize(offsets_.back());
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    incidence_[fill[edges_[e].u]++] = e;
    incidence_[fill[edges_[e].v]++] = e;
  }
}

std::optional<std::vector<Side>> two_coloring(const Graph& g) {
  constexpr auto kUnset = static_cast<std::uint8_t>(2);
  std::vector<std::uint8_t> color(g.vertex_count(), kUnset);
  std::deque<VertexId> queue;
  for (VertexId s = 0; s < g.vertex_count(); ++s) {
    if (color[s] != kUnset) continue;
    color[s] = 0;
    queue.push_back(s);
    while (!queue.empty()) {
      const VertexId w = queue.front();
      queue.pop_front();
      for (EdgeId e : g.incident(w)) {
        const VertexId y = g.other(e, w);
        if (color[y] == kUnset) {
          color[y] = static_cast<std::uint8_t>(1 - color[w]);
          queue.push_back(y);
        } else if (color[y] == color[w]) {
          return std::nullopt;
        }
      }
    }
  }
  std::vector<Side> sides(g.vertex_count());
  std::transform(color.begin(), color.end(), sides.begin(),
                 [](std::uint8_t c) { return c == 0 ? Side::left : Side::right; });
  return sides;
}

bool is_triangle_free(const Graph& g) {
  if (g.has_bipartition()) return true;
  std::vector<std::uint8_t> mark(g.vertex_count(), 0);
  for (VertexId a = 0; a < g.vertex_count(); ++a) {
    for (EdgeId e : g.incident(a)) mark[g.other(e, a)] = 1;
    for (EdgeId e : g.incident(a)) {
      const VertexId b = g.other(e, a);
      for (EdgeId f : g.incident(b)) {
        if (mark[g.other(f, b)]) return false;
      }
    }
    for (EdgeId e : g.incident(a)) mark[g.other(e, a)] = 0;
  }
  return true;
}

FractionalMatching::FractionalMatching(Graph graph, std::vector<double> x, double tolerance)
    : graph_(std::move(graph)), x_(std::move(x)), tolerance_(tolerance) {
  if (x_.size() != graph_.edge_count()) {
    throw InputError("weight vector has " + std::to_string(x_.size()) + " entries for " +
                     std::to_string(graph_.edge_count()) + " edges");
  }
  if (!(tolerance_ >= 0.0)) throw InputError("load tolerance must be non-negative");
}

double FractionalMatching::load(VertexId v) const {
  double total = 0.0;
  for (EdgeId e : graph_.incident(v)) total += x_[e];
  return total;
}

double FractionalMatching::max_weight() const {
  double best = 0.0;
  for (double w : x_) best = std::max(best, w);
  return best;
}

std::string Violation::message() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::weight_out_of_range:
      out << "weight out of range: edge " << index << " has x = " << magnitude;
      break;
    case Kind::vertex_overloaded:
      out << "vertex overloaded: vertex " << index << " has load " << magnitude;
      break;
  }
  return out.str();
}

std::vector<Violation> validate(const FractionalMatching& fm) {
  std::vector<Violation> out;
  const auto x = fm.x();
  for (EdgeId e = 0; e < x.size(); ++e) {
    if (!(x[e] >= 0.0 && x[e] <= 1.0)) {
      out.push_back({Violation::Kind::weight_out_of_range, e, x[e]});
    }
  }
  for (VertexId v = 0; v < fm.graph().vertex_count(); ++v) {
    const double load = fm.load(v);
    if (!(load <= 1.0 + fm.tolerance())) {
      out.push_back({Violation::Kind::vertex_overloaded, v, load});
    }
  }
  return out;
}

LoadCompletion complete_loads(const FractionalMatching& fm) {
  if (auto violations = validate(fm); !violations.empty()) {
    throw InputError("cannot complete loads of an invalid instance: " + violations.front().message());
  }
  const Graph& g = fm.graph();
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  std::vector<double> x(fm.x().begin(), fm.x().end());
  std::optional<std::vector<Side>> sides = g.sides();
  std::size_t vertex_count = g.vertex_count();

  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const double load = fm.load(v);
    if (load >= 1.0 - fm.tolerance()) continue;
    const auto partner = static_cast<VertexId>(vertex_count++);
    edges.push_back({v, partner});
    x.push_back(1.0 - load);
    if (sides) sides->push_back((*sides)[v] == Side::left ? Side::right : Side::left);
  }

  LoadCompletion out;
  out.original_vertex_count = g.vertex_count();
  out.original_edge_count = g.edge_count();
  out.instance = FractionalMatching(Graph(vertex_count, std::move(edges), std::move(sides)),
                                    std::move(x), fm.tolerance());
  return out;
}

LoadCompletion trivial_completion(const FractionalMatching& fm) {
  return LoadCompletion{fm, fm.graph().vertex_count(), fm.graph().edge_count()};
}

DoublyStochasticMatrix::DoublyStochasticMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (n_ == 0) throw InputError("matrix dimension must be positive");
  if (entries_.size() != n_ * n_) {
    throw InputError("matrix has " + std::to_string(entries_.size()) + " entries, expected " +
                     std::to_string(n_ * n_));
  }
  for (double a : entries_) {
    if (!(a >= 0.0)) throw InputError("matrix entries must be non-negative");
  }
  if (const double err = max_marginal_error(); err > kLoadTolerance) {
    throw InputError("matrix is not doubly stochastic: a row or column sum is off by " + std::to_string(err));
  }
}

double DoublyStochasticMatrix::max_marginal_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      row += (*this)(i, j);
      col += (*this)(j, i);
    }
    worst = std::max({worst, std::abs(row - 1.0), std::abs(col - 1.0)});
  }
  return worst;
}

FractionalMatching DoublyStochasticMatrix::to_fractional_matching() const {
  std::vector<Edge> edges;
  std::vector<double> x;
  edges.reserve(n_ * n_);
  x.reserve(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(n_ + j)});
      x.push_back((*this)(i, j));
    }
  }
  std::vector<Side> sides(2 * n_, Side::left);
  std::fill(sides.begin() + static_cast<std::ptrdiff_t>(n_), sides.end(), Side::right);
  return FractionalMatching(Graph(2 * n_, std::move(edges), std::move(sides)), std::move(x));
}

FractionalMatching gen_uniform_knn(std::size_t n) {
  if (n == 0) throw InputError("gen_uniform_knn needs n >= 1");
  std::vector<double> entries(n * n, 1.0 / static_cast<double>(n));
  return DoublyStochasticMatrix(n, std::move(entries)).to_fractional_matching();
}

DoublyStochasticMatrix gen_birkhoff(std::size_t n, std::size_t k, RngStream& rng) {
  if (n == 0 || k == 0) throw InputError("gen_birkhoff needs n >= 1 and k >= 1");
  std::vector<double> weights(k);
  for (double& w : weights) w = -std::log1p(-rng.uniform());
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> entries(n * n, 0.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t p = 0; p < k; ++p) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    for (std::size_t i = 0; i < n; ++i) entries[i * n + perm[i]] += weights[p] / total;
  }
  return DoublyStochasticMatrix(n, std::move(entries));
}

FractionalMatching gen_random_bipartite(std::size_t left, std::size_t right,
                                       std::size_t max_degree, RngStream& rng) {
  if (left == 0 || right == 0 || max_degree == 0) {
    throw InputError("gen_random_bipartite needs positive sizes and degree bound");
  }
  std::vector<Edge> edges;
  std::vector<double> w;
  std::vector<std::size_t> right_degree(right, 0);
  std::vector<std::uint8_t> used(right, 0);
  for (std::size_t u = 0; u < left; ++u) {
    const std::size_t want = 1 + rng.uniform_index(max_degree);
    std::vector<std::size_t> chosen;
    for (std::size_t attempt = 0; attempt < 4 * want && chosen.size() < want; ++attempt) {
      const std::size_t r = rng.uniform_index(right);
      if (used[r] || right_degree[r] >= max_degree) continue;
      used[r] = 1;
      chosen.push_back(r);
    }
    for (std::size_t r : chosen) {
      used[r] = 0;
      ++right_degree[r];
      edges.push_back({static_cast<VertexId>(u), static_cast<VertexId>(left + r)});
      w.push_back(0.05 + 0.95 * rng.uniform());
    }
  }
  std::vector<double> weighted_degree(left + right, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    weighted_degree[edges[e].u] += w[e];
    weighted_degree[edges[e].v] += w[e];
  }
  std::vector<double> x(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    x[e] = w[e] / std::max(weighted_degree[edges[e].u], weighted_degree[edges[e].v]);
  }
  std::vector<Side> sides(left + right, Side::left);
  std::fill(sides.begin() + static_cast<std::ptrdiff_t>(left), sides.end(), Side::right);
  return FractionalMatching(Graph(left + right, std::move(edges), std::move(sides)), std::move(x));
}

}  // namespace crs
