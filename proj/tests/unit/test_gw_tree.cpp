#include <algorithm>
#include <cmath>
#include <numeric>

#include "crs/error.hpp"
#include "crs/gw_tree.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace crs;

namespace {

Graph relabel(const Graph& g, RngStream& rng, bool swap_roots) {
  const std::size_t n = g.vertex_count();
  std::vector<VertexId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 2; --i) std::swap(perm[i], perm[2 + rng.uniform_index(i - 1)]);
  if (swap_roots) std::swap(perm[0], perm[1]);
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) edges.push_back({perm[e.u], perm[e.v]});
  for (std::size_t i = edges.size() - 1; i > 0; --i) std::swap(edges[i], edges[rng.uniform_index(i + 1)]);
  return Graph(n, edges);
}

}  // namespace

TEST_SUITE("gw_tree") {
  TEST_CASE("lambda constants") {
    const auto c = solve_lambda();
    CHECK(std::abs(c.lambda - 0.567143) <= 1e-6);
    CHECK(std::abs(c.lambda - std::exp(-c.lambda)) < 1e-12);
    CHECK(c.residual < 1e-12);
    CHECK(std::abs(c.ks_prob - 0.544) <= 0.001);
    CHECK(c.ks_prob == 2 * (1 - c.lambda) - c.lambda * c.lambda);
    CHECK(c.max_match_density == 1 - c.lambda - c.lambda * c.lambda / 2);
  }

  TEST_CASE("sampled trees are trees containing the marked edge") {
    for (std::uint64_t t = 0; t < 200; ++t) {
      RngStream rng(1, t);
      const auto tree = sample_tree(rng, 10'000);
      if (tree.truncated) continue;
      const auto g = tree.to_graph();
      CHECK(g.edge_count() + 1 == g.vertex_count());
      CHECK(g.edge(0).u + g.edge(0).v == 1);
      CHECK_NOTHROW(lw_label(g, 0));
    }
  }

  TEST_CASE("single-edge tree frequency is e^-2") {
    const std::uint64_t trials = 100'000;
    std::uint64_t single = 0;
    GwTree tree;
    for (std::uint64_t t = 0; t < trials; ++t) {
      RngStream rng(2, t);
      sample_tree(rng, tree, 1000);
      single += tree.node_count() == 2;
    }
    CHECK(std::abs(single / double(trials) - std::exp(-2.0)) <= 0.003);
  }

  TEST_CASE("node cap truncates") {
    bool saw = false;
    for (std::uint64_t t = 0; t < 200 && !saw; ++t) {
      RngStream rng(3, t);
      const auto tree = sample_tree(rng, 8);
      if (tree.truncated) saw = true;
      CHECK(tree.node_count() <= 8);
    }
    CHECK(saw);
  }

  TEST_CASE("exact tree probabilities") {
    CHECK(gw_tree_probability(Graph(2, {{0, 1}})) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    // One root has a single leaf child: e^-1 (one child) * e^-1 (leaf) * e^-1 (other root), two orientations.
    CHECK(gw_tree_probability(Graph(3, {{0, 1}, {0, 2}})) == doctest::Approx(2 * std::exp(-3.0)).epsilon(1e-12));
    CHECK(gw_tree_probability(Graph(3, {{0, 1}, {1, 2}})) == doctest::Approx(2 * std::exp(-3.0)).epsilon(1e-12));
    // Both roots with one leaf child each.
    CHECK(gw_tree_probability(Graph(4, {{0, 1}, {0, 2}, {1, 3}})) == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
    // One root with two leaf children: Pr[Poisson = 2] = e^-1 / 2.
    CHECK(gw_tree_probability(Graph(4, {{0, 1}, {0, 2}, {0, 3}})) ==
          doctest::Approx(2 * 0.5 * std::exp(-1.0) * std::exp(-2.0) * std::exp(-1.0)).epsilon(1e-12));
  }

  TEST_CASE("enumerated trees are distinct and their probabilities sum below one") {
    const auto trees = enumerate_marked_trees(5);
    double total = 0.0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      total += gw_tree_probability(trees[i]);
      for (std::size_t j = 0; j < i; ++j) CHECK(!oracle::marked_isomorphic(trees[i], trees[j]));
    }
    CHECK(trees.front().edge_count() == 1);
    CHECK(total < 1.0);
    CHECK(total > std::exp(-2.0));
    // Unordered pairs of rooted trees: 1, 1, 3, 6 classes for 1..4 edges.
    std::vector<int> by_size(6, 0);
    for (const auto& t : trees) ++by_size[t.edge_count()];
    CHECK(by_size[1] == 1);
    CHECK(by_size[2] == 1);
    CHECK(by_size[3] == 3);
    CHECK(by_size[4] == 6);
  }

  TEST_CASE("canonical code agrees with brute-force isomorphism up to 8 nodes") {
    const auto trees = enumerate_marked_trees(7);
    RngStream rng(4, 0);
    for (int t = 0; t < 300; ++t) {
      const Graph& a = trees[rng.uniform_index(trees.size())];
      const Graph& b = trees[rng.uniform_index(trees.size())];
      const Graph c = relabel(b, rng, rng.bernoulli(0.5));
      CHECK((marked_tree_code(a) == marked_tree_code(c)) == oracle::marked_isomorphic(a, c));
      CHECK(marked_tree_code(b) == marked_tree_code(c));
    }
    // Swapping which side of the marked edge a leaf hangs from is an isomorphism;
    // moving it off the marked pair is not.
    CHECK(marked_tree_code(Graph(3, {{0, 1}, {0, 2}})) == marked_tree_code(Graph(3, {{0, 1}, {1, 2}})));
    CHECK(marked_tree_code(Graph(4, {{0, 1}, {1, 2}, {2, 3}})) != marked_tree_code(Graph(4, {{0, 1}, {0, 2}, {1, 3}})));
    CHECK_THROWS_AS(marked_tree_code(Graph(3, {{0, 2}, {1, 2}})), NotATree);
  }

  TEST_CASE("root edge estimate basics") {
    const auto one = estimate_root_edge_prob(1, 5);
    CHECK((one.estimate == 0.0 || one.estimate == 1.0));
    const auto few = estimate_root_edge_prob(20'000, 6);
    CHECK(few.ci.low <= few.estimate);
    CHECK(few.estimate <= few.ci.high);
    CHECK(std::abs(few.estimate - solve_lambda().ks_prob) < 0.02);
    CHECK(estimate_root_edge_prob(5000, 7, 1).selected == estimate_root_edge_prob(5000, 7, 4).selected);
  }

  TEST_CASE("single-edge trees always match the marked edge") {
    GwTree tree;
    tree.parent = {1, 0};
    tree.child_begin = {2, 2, 2};
    RngStream rng(8, 0);
    TreeKsWorkspace ws;
    CHECK(ks_first_stage(tree, rng, ws) == Matching{0});
  }

  TEST_CASE("component probe on a large uniform instance") {
    const auto fm = gen_uniform_knn(200);
    const auto trees = enumerate_marked_trees(2);
    const auto report = component_distribution_probe(fm, 0, trees, 20'000, 9);
    REQUIRE(!report.rows.empty());
    CHECK(report.rows.front().gw_probability == doctest::Approx(std::exp(-2.0)));
    CHECK(report.max_gap < 0.03);
  }
}
