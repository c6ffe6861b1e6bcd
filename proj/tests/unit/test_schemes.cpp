#include <cmath>

#include "crs/bipartite_schemes.hpp"
#include "crs/error.hpp"
#include "crs/evaluation.hpp"
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

FractionalMatching knn(std::size_t n) {
  std::vector<Edge> edges;
  for (VertexId i = 0; i < n; ++i) {
    for (VertexId j = 0; j < n; ++j) edges.push_back({i, static_cast<VertexId>(n + j)});
  }
  return FractionalMatching(Graph(2 * n, edges, sides(n, n)), std::vector<double>(n * n, 1.0 / n));
}

}  // namespace

TEST_SUITE("schemes") {
  TEST_CASE("constants") {
    const auto c = compute_constants();
    const double beta = (std::exp(-1 / kE) - std::exp(-1.0)) / (1 - std::exp(-1.0));
    CHECK(c.beta == doctest::Approx(beta).epsilon(1e-14));
    CHECK(std::abs(c.beta - 0.51315) <= 1e-4);
    CHECK(std::abs(c.gamma - 0.50936) <= 1e-4);
    CHECK(c.gamma >= 0.509);
    CHECK(std::abs(c.simple_factor - 0.48026) <= 1e-4);
    CHECK(c.simple_factor >= 0.480);
    CHECK(c.two_stage_factor >= 0.468);
    CHECK(std::abs(c.two_stage_factor - 0.4685) <= 1e-4);
  }

  TEST_CASE("step6 mode names round-trip") {
    for (auto m : {Step6Mode::exact, Step6Mode::calibrated, Step6Mode::uniform}) CHECK(parse_step6_mode(to_string(m)) == m);
    CHECK_THROWS_AS(parse_step6_mode("fast"), InputError);
  }

  TEST_CASE("simple scheme on a single edge selects it iff active") {
    const SimpleScheme s(single_edge(1.0));
    const auto p = oracle::simple_exact(s);
    CHECK(p[0] == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-12));
  }

  TEST_CASE("simple scheme on the 4-cycle clears the bound") {
    const SimpleScheme s(four_cycle());
    const auto p = oracle::simple_exact(s);
    for (EdgeId e = 0; e < 4; ++e) CHECK(p[e] / 0.5 >= 0.4802);
  }

  TEST_CASE("simple availability marginal is (e^x - 1)/e") {
    const SimpleScheme s(four_cycle());
    const auto& fm = s.instance();
    const auto& g = fm.graph();
    // Pr[edge 0 available at vertex 0] by enumerating presence and activation.
    double avail = 0.0;
    std::vector<std::vector<double>> coins;
    for (EdgeId e = 0; e < 4; ++e) {
      const double a = SimpleScheme::activation(fm.x(e));
      coins.push_back({1 - fm.x(e) * a, fm.x(e) * a});
    }
    oracle::for_each_combination(coins, [&](const std::vector<std::size_t>& c, double w) {
      if (!c[0]) return;
      int others = 0;
      for (EdgeId f : g.incident(2)) others += f != 0 && c[f];
      if (others == 0) avail += w;
    });
    CHECK(avail == doctest::Approx((std::exp(0.5) - 1) / kE).epsilon(1e-12));
    CHECK(avail == doctest::Approx(0.2387).epsilon(1e-3));
    CHECK(s.availability(0, 0) == doctest::Approx(avail).epsilon(1e-12));
  }

  TEST_CASE("simple scheme rejects triangles") {
    const FractionalMatching tri(Graph(3, {{0, 1}, {1, 2}, {2, 0}}), {0.5, 0.5, 0.5});
    CHECK_THROWS_AS(SimpleScheme{tri}, InputError);
  }

  TEST_CASE("two-stage scheme") {
    const TwoStageScheme single(single_edge(1.0));
    CHECK(single.stage1_marginals()[0] == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-9));
    CHECK(oracle::two_stage_exact(single)[0] == doctest::Approx(compute_constants().two_stage_factor).epsilon(1e-9));

    const TwoStageScheme cyc(four_cycle());
    const auto p = oracle::two_stage_exact(cyc);
    for (EdgeId e = 0; e < 4; ++e) CHECK(p[e] / 0.5 >= 0.468);

    RngStream rng(1, 0);
    CHECK(cyc.run(RealizedSet(4), rng).empty());
  }

  TEST_CASE("rbg single edge: arrival probability and step 6") {
    const RbgScheme s(single_edge(1.0));
    const auto o = oracle::rbg_exact(s);
    const double arrival = o.r1[0] + o.r2[0] + o.r3[0];
    const double expected = (1 - std::exp(-1 / kE)) + (std::exp(-1 / kE) - std::exp(-1.0)) + 0.5 * std::exp(-1.0);
    CHECK(arrival == doctest::Approx(expected).epsilon(1e-9));
    CHECK(arrival == doctest::Approx(0.816).epsilon(1e-3));
    CHECK(o.matched[0] >= compute_constants().gamma - 1e-9);
  }

  TEST_CASE("rbg exact marginals agree with the brute-force cascade") {
    for (const auto& fm : {single_edge(1.0), single_edge(0.3), four_cycle()}) {
      const RbgScheme s(fm);
      const auto o = oracle::rbg_exact(s);
      const auto& m = s.exact_marginals();
      for (EdgeId e = 0; e < s.instance().graph().edge_count(); ++e) {
        CHECK(m.gray[e] == doctest::Approx(o.gray[e]).epsilon(1e-9));
        CHECK(m.red[e] == doctest::Approx(o.red[e]).epsilon(1e-9));
        CHECK(m.r1[e] == doctest::Approx(o.r1[e]).epsilon(1e-9));
        CHECK(m.r2[e] == doctest::Approx(o.r2[e]).epsilon(1e-9));
        CHECK(m.r3[e] == doctest::Approx(o.r3[e]).epsilon(1e-9));
        CHECK(m.matched[e] == doctest::Approx(o.matched[e]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("rbg stage marginals on the 4-cycle match closed forms") {
    const RbgScheme s(four_cycle());
    const auto o = oracle::rbg_exact(s);
    const double gamma = compute_constants().gamma;
    for (EdgeId e = 0; e < 4; ++e) {
      CHECK(o.gray[e] == doctest::Approx(0.5 - (1 - std::exp(-0.5))).epsilon(1e-12));
      CHECK(o.gray[e] == doctest::Approx(0.10653).epsilon(1e-4));
      CHECK(o.red[e] == doctest::Approx(1 - std::exp(-0.5 / kE)).epsilon(1e-12));
      CHECK(o.r1[e] == doctest::Approx((1 - std::exp(-1 / kE)) * 0.5).epsilon(1e-9));
      CHECK(o.r1[e] == doctest::Approx(0.15390).epsilon(1e-4));
      CHECK(o.r3[e] >= 0.5 * 0.5 * 0.5 / (2 * kE) - 1e-9);
      CHECK(o.matched[e] >= gamma * 0.5 - 1e-9);
    }
  }

  TEST_CASE("rbg stage frequencies on a random instance are within 4 SE of closed forms") {
    RngStream gen(2, 0);
    const auto fm = gen_random_bipartite(5, 5, 3, gen);
    SchemeOptions opts;
    opts.step6 = Step6Mode::uniform;
    const RbgScheme s(fm, opts);
    const std::uint64_t trials = 100'000;
    const auto f = stage_frequencies(s, trials, 3);
    const auto& x = s.instance();
    auto within = [&](std::uint64_t count, double p) {
      const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / trials);
      return std::abs(count / double(trials) - p) <= 4 * se + 1e-9;
    };
    for (EdgeId e = 0; e < x.graph().edge_count(); ++e) {
      const double xe = x.x(e);
      if (xe <= 0) continue;
      CHECK(within(f.gray[e], xe - (1 - std::exp(-xe))));
      CHECK(within(f.red[e], 1 - std::exp(-xe / kE)));
      CHECK(within(f.r1[e], (1 - std::exp(-1 / kE)) * xe));
    }
  }

  TEST_CASE("red indicators at a common left vertex are uncorrelated") {
    const auto fm = knn(3);
    SchemeOptions opts;
    opts.step6 = Step6Mode::uniform;
    const RbgScheme s(fm, opts);
    const std::uint64_t trials = 100'000;
    std::uint64_t a = 0, b = 0, both = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      RngStream rng(4, t);
      const auto r = sample_r(s.instance(), rng);
      const auto st = s.run_left(r, rng);
      const bool ra = st.color[0] == EdgeColor::red;
      const bool rb = st.color[1] == EdgeColor::red;
      a += ra;
      b += rb;
      both += ra && rb;
    }
    const double pa = a / double(trials), pb = b / double(trials), pab = both / double(trials);
    const double se = std::sqrt(pab * (1 - pab) / trials + pa * pa * pb * (1 - pb) / trials + pb * pb * pa * (1 - pa) / trials);
    CHECK(std::abs(pab - pa * pb) <= 4 * se);
  }

  TEST_CASE("colored state invariants") {
    const auto fm = knn(3);
    const RbgScheme s(fm);
    const auto& g = s.instance().graph();
    for (std::uint64_t t = 0; t < 3000; ++t) {
      RngStream rng(5, t);
      const auto r = sample_r(s.instance(), rng);
      const auto st = s.run_colored(r, rng);
      std::vector<int> per_left(g.vertex_count(), 0), active_right(g.vertex_count(), 0);
      for (EdgeId e = 0; e < g.edge_count(); ++e) {
        CHECK((st.color[e] == EdgeColor::absent) == !r.contains(e));
        if (st.color[e] == EdgeColor::red || st.color[e] == EdgeColor::blue) ++active_right[s.right_of(e)];
      }
      for (EdgeId e = 0; e < g.edge_count(); ++e) {
        if (st.color[e] == EdgeColor::red) CHECK(active_right[s.right_of(e)] == 1);
      }
      for (const auto* set : {&st.r1, &st.r2, &st.r3}) {
        for (EdgeId e : *set) ++per_left[s.left_of(e)];
      }
      for (VertexId u = 0; u < g.vertex_count(); ++u) CHECK(per_left[u] <= 1);
      CHECK(props::valid_matching(g, r, st.final));
    }
  }

  TEST_CASE("blue survivals are not positively correlated on K33") {
    const auto fm = knn(3);
    SchemeOptions opts;
    opts.step6 = Step6Mode::uniform;
    const RbgScheme s(fm, opts);
    for (const auto& pair : blue_pair_correlation(s, 50'000, 6)) {
      CHECK(pair.p_ef <= pair.p_e * pair.p_f + 4 * pair.se + 1e-12);
    }
  }

  TEST_CASE("calibrated step 6 builds and runs") {
    RngStream gen(7, 0);
    const auto fm = gen_random_bipartite(6, 6, 4, gen);
    SchemeOptions opts;
    opts.step6 = Step6Mode::calibrated;
    opts.calibration_samples = 20'000;
    const RbgScheme s(fm, opts);
    CHECK(s.step6_mode() == Step6Mode::calibrated);
    const auto rep = mc_balancedness(s, 2000, 8);
    CHECK(rep.invalid_matchings == 0);

    const auto& g = s.instance().graph();
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      if (g.side(v) != Side::right) continue;
      for (const auto& [mask, w] : s.arrivals(v)) {
        if (mask == 0) continue;
        double total = 0.0;
        for (std::size_t i = 0; i < s.final_rule(v).size(); ++i) total += s.final_rule(v).pick_probability(mask, i);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("exact step 6 refuses large instances") {
    SchemeOptions opts;
    opts.step6 = Step6Mode::exact;
    CHECK_THROWS_AS(RbgScheme(knn(4), opts), TooLarge);
  }

  TEST_CASE("degree cap is reported with the vertex") {
    SchemeOptions opts;
    opts.degree_cap = 2;
    opts.step6 = Step6Mode::uniform;
    try {
      RbgScheme s(knn(3), opts);
      FAIL("expected DegreeCapExceeded");
    } catch (const DegreeCapExceeded& e) {
      CHECK(e.vertex() >= 0);
      CHECK(e.degree() == 3);
      CHECK(e.cap() == 2);
    }
  }

  TEST_CASE("every scheme outputs matchings inside R") {
    const auto tally = props::scheme_matching_property(9, 6, 200);
    INFO(tally.first_failure);
    CHECK(tally.violations == 0);
  }

  TEST_CASE("make_scheme names") {
    for (const char* name : {"simple", "two-stage", "rbg", "karp-sipser"}) CHECK(make_scheme(name, four_cycle())->name() == name);
    CHECK_THROWS_AS(make_scheme("greedy", four_cycle()), InputError);
  }
}
