#include <cmath>

#include "crs/error.hpp"
#include "crs/evaluation.hpp"
#include "crs/gw_tree.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"

using namespace crs;

namespace {

const double kE = std::exp(1.0);

std::vector<Side> sides(std::size_t left, std::size_t right) {
  std::vector<Side> s(left, Side::left);
  s.resize(left + right, Side::right);
  return s;
}

FractionalMatching single_edge(double x) { return FractionalMatching(Graph(2, {{0, 1}}, sides(1, 1)), {x}); }

FractionalMatching four_cycle() {
  return FractionalMatching(Graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, sides(2, 2)), {0.5, 0.5, 0.5, 0.5});
}

class KeepEdge final : public Scheme {
 public:
  explicit KeepEdge(const FractionalMatching& fm) : Scheme(trivial_completion(fm)) {}
  std::string name() const override { return "keep"; }
  Matching run_full(const RealizedSet& r, RngStream&) const override {
    return r.contains(0) ? Matching{0} : Matching{};
  }
};

class Nothing final : public Scheme {
 public:
  explicit Nothing(const FractionalMatching& fm) : Scheme(trivial_completion(fm)) {}
  std::string name() const override { return "nothing"; }
  Matching run_full(const RealizedSet&, RngStream&) const override { return {}; }
};

class Cheat final : public Scheme {
 public:
  explicit Cheat(const FractionalMatching& fm) : Scheme(trivial_completion(fm)) {}
  std::string name() const override { return "cheat"; }
  Matching run_full(const RealizedSet&, RngStream&) const override { return {0, 1}; }
};

double conditional(const std::vector<ExactEdge>& v, EdgeId e) {
  for (const auto& x : v) {
    if (x.edge == e) return x.conditional;
  }
  return -1.0;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("mc_balancedness on trivial schemes") {
    const auto fm = single_edge(0.4);
    const auto keep = mc_balancedness(KeepEdge(fm), 1000, 1);
    REQUIRE(keep.edges.size() == 1);
    CHECK(keep.edges[0].estimate == 1.0);
    CHECK(keep.edges[0].present == 1000);

    const auto none = mc_balancedness(Nothing(fm), 1000, 1);
    CHECK(none.edges[0].estimate == 0.0);
    CHECK(none.edges[0].ci.high < 0.01);
    CHECK(none.min_estimate == 0.0);
  }

  TEST_CASE("mc_balancedness counts invalid matchings and rejects bad probes") {
    const FractionalMatching path(Graph(3, {{0, 1}, {1, 2}}), {0.5, 0.5});
    const auto rep = mc_balancedness(Cheat(path), 100, 2);
    CHECK(rep.invalid_matchings > 0);
    const std::vector<EdgeId> bad{7};
    CHECK_THROWS_AS(mc_balancedness(Nothing(path), 10, 2, 1, bad), InputError);
    const FractionalMatching zero(Graph(3, {{0, 1}, {1, 2}}), {0.5, 0.0});
    const std::vector<EdgeId> never{1};
    CHECK_THROWS_AS(mc_balancedness(Nothing(zero), 10, 2, 1, never), EdgeNeverAppears);
  }

  TEST_CASE("exact evaluators match closed forms and oracles") {
    const auto simple1 = exact_balancedness(SimpleScheme(single_edge(1.0)));
    CHECK(conditional(simple1, 0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-12));

    const SimpleScheme sc(four_cycle());
    const auto simple4 = exact_balancedness(sc);
    const auto o = oracle::simple_exact(sc);
    for (EdgeId e = 0; e < 4; ++e) {
      CHECK(conditional(simple4, e) >= 0.4802);
      CHECK(std::abs(conditional(simple4, e) - o[e] / 0.5) <= 1e-9);
    }

    const TwoStageScheme tc(four_cycle());
    const auto two = exact_balancedness(tc);
    const auto ot = oracle::two_stage_exact(tc);
    for (EdgeId e = 0; e < 4; ++e) {
      CHECK(conditional(two, e) >= 0.468);
      CHECK(std::abs(conditional(two, e) - ot[e] / 0.5) <= 1e-9);
    }

    const RbgScheme rc(single_edge(1.0));
    const auto rbg = exact_balancedness(rc);
    CHECK(conditional(rbg, 0) >= 0.509);
    CHECK(std::abs(conditional(rbg, 0) - oracle::rbg_exact(rc).matched[0]) <= 1e-9);
  }

  TEST_CASE("exact Karp-Sipser evaluation matches branch enumeration") {
    const FractionalMatching fm(Graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}), {0.5, 0.5, 0.5, 0.5});
    const auto ks = exact_balancedness(KarpSipserScheme(fm));
    const auto o = oracle::ks_exact(fm);
    for (EdgeId e = 0; e < 4; ++e) CHECK(std::abs(conditional(ks, e) * 0.5 - o[e]) <= 1e-12);
    CHECK(conditional(ks, 0) == doctest::Approx(0.625));

    const FractionalMatching star(Graph(5, {{0, 1}, {0, 2}, {0, 3}, {1, 4}}), {0.3, 0.3, 0.3, 0.6});
    const auto s = exact_balancedness(KarpSipserScheme(star));
    const auto os = oracle::ks_exact(star);
    for (EdgeId e = 0; e < 4; ++e) CHECK(std::abs(conditional(s, e) * star.x(e) - os[e]) <= 1e-12);
  }

  TEST_CASE("exact evaluation caps") {
    std::vector<Edge> edges;
    for (VertexId i = 0; i < 3; ++i) {
      for (VertexId j = 0; j < 3; ++j) edges.push_back({i, static_cast<VertexId>(3 + j)});
    }
    const FractionalMatching k33(Graph(6, edges, sides(3, 3)), std::vector<double>(9, 1.0 / 3));
    CHECK_THROWS_AS(exact_balancedness(KarpSipserScheme(k33)), TooLarge);
    SchemeOptions opts;
    opts.step6 = Step6Mode::uniform;
    CHECK_THROWS_AS(exact_balancedness(RbgScheme(k33, opts)), InputError);
  }

  TEST_CASE("monte carlo converges to the exact values") {
    const RbgScheme s(four_cycle());
    const auto exact = exact_balancedness(s);
    const auto mc = mc_balancedness(s, 100'000, 3);
    for (const auto& e : mc.edges) {
      const double x = conditional(exact, e.edge);
      const double se = std::sqrt(x * (1 - x) / e.trials);
      CHECK(std::abs(e.estimate - x) <= 4 * se);
      CHECK(e.ci.low <= e.estimate);
      CHECK(e.estimate <= e.ci.high);
      CHECK(e.estimate >= 0.509 - 4 * e.standard_error);
    }
    CHECK(mc.invalid_matchings == 0);
  }

  TEST_CASE("monte carlo is identical across thread counts") {
    const TwoStageScheme s(four_cycle());
    const auto a = mc_balancedness(s, 4000, 4, 1);
    const auto b = mc_balancedness(s, 4000, 4, 3);
    for (std::size_t i = 0; i < a.edges.size(); ++i) CHECK(a.edges[i].selected == b.edges[i].selected);
  }

  TEST_CASE("wilson interval coverage") {
    const double p = 0.509;
    int covered = 0;
    for (std::uint64_t rep = 0; rep < 1000; ++rep) {
      RngStream rng(5, rep);
      std::uint64_t hits = 0;
      for (int i = 0; i < 1000; ++i) hits += rng.bernoulli(p);
      const auto ci = wilson_interval(hits, 1000);
      covered += ci.low <= p && p <= ci.high;
    }
    CHECK(covered >= 980);
  }

  TEST_CASE("lem bound sides") {
    const std::vector<double> one{1.0};
    const auto [lhs, rhs] = lem_bound_sides(one);
    CHECK(lhs == doctest::Approx((kE - 1) / kE).epsilon(1e-12));
    const auto ref = props::lem_sides(one);
    CHECK(rhs == doctest::Approx(ref.second).epsilon(1e-12));
    CHECK(std::abs(rhs - 0.55622) <= 1e-4);
    CHECK(lhs >= rhs);

    const std::vector<double> zeros(5, 0.0);
    const auto z = lem_bound_sides(zeros);
    CHECK(z.first == 0.0);
    CHECK(std::abs(z.second) <= 1e-15);

    RngStream rng(6, 0);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> x(1 + rng.uniform_index(6));
      double sum = 0;
      for (double& v : x) sum += v = rng.uniform();
      for (double& v : x) v /= sum;
      const auto a = lem_bound_sides(x);
      const auto b = props::lem_sides(x);
      CHECK(a.first == doctest::Approx(b.first).epsilon(1e-12));
      CHECK(a.second == doctest::Approx(b.second).epsilon(1e-12));
    }
  }

  TEST_CASE("lem bound property") {
    const auto rep = check_lem_bound(20'000, 7);
    CHECK(rep.violations == 0);
    CHECK(rep.min_slack >= -1e-12);
  }

  TEST_CASE("density on a perfect matching instance") {
    const FractionalMatching pm(Graph(6, {{0, 3}, {1, 4}, {2, 5}}, sides(3, 3)), {1.0, 1.0, 1.0});
    const auto rep = density_experiment(pm, 10, 8);
    CHECK(rep.ks_per_vertex == doctest::Approx(0.5));
    CHECK(rep.max_per_vertex == doctest::Approx(0.5));
    CHECK(rep.mean_gap == 0.0);
  }

  TEST_CASE("density on a small uniform instance") {
    const auto rep = density_experiment(gen_uniform_knn(200), 10, 9);
    CHECK(rep.target_per_vertex == doctest::Approx(solve_lambda().max_match_density));
    CHECK(std::abs(rep.ks_per_vertex * 2 - 0.544) < 0.03);
    CHECK(rep.mean_gap >= 0.0);
    const auto threaded = density_experiment(gen_uniform_knn(200), 10, 9, 3);
    CHECK(threaded.mean_ks == rep.mean_ks);
    CHECK(threaded.mean_max == rep.mean_max);
  }

  TEST_CASE("conjecture probe") {
    std::vector<double> perm(16, 0.0);
    for (int i = 0; i < 4; ++i) perm[i * 4 + (i + 1) % 4] = 1.0;
    const DoublyStochasticMatrix p(4, perm);
    std::vector<double> uni(16, 0.25);
    const DoublyStochasticMatrix u(4, uni);
    const auto rep = conjecture_probe({p, u}, 2000, 10);
    CHECK(rep.rows[0].mean == 4.0);
    CHECK(rep.rows[0].standard_error == 0.0);
    const double se = std::hypot(rep.rows[1].standard_error, rep.uniform.standard_error);
    CHECK(std::abs(rep.rows[1].mean - rep.uniform.mean) <= 4 * se);
    CHECK(!rep.rows[1].flagged);
    CHECK(rep.flags == 0);
  }
}
