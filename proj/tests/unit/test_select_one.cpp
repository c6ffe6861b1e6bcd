#include <cmath>

#include <nlohmann/json.hpp>

#include "crs/error.hpp"
#include "crs/select_one.hpp"
#include "doctest.h"
#include "properties.hpp"

using namespace crs;

TEST_SUITE("select_one") {
  TEST_CASE("singleton rule picks the element whenever present") {
    const auto d = SubsetDistribution::explicit_atoms({7}, {{1, 0.7}, {0, 0.3}});
    const std::vector<double> beta{0.7};
    const auto rule = build_rule(d, beta);
    CHECK(rule.pick_probability(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    RngStream rng(1, 0);
    for (int i = 0; i < 100; ++i) {
      CHECK(apply_rule(rule, 1, rng) == std::optional<int>(7));
      CHECK(!apply_rule(rule, 0, rng).has_value());
    }
  }

  TEST_CASE("two elements at one half with targets 3/8") {
    const auto d = SubsetDistribution::product({0, 1}, {0.5, 0.5});
    const std::vector<double> beta{0.375, 0.375};
    const auto rule = build_rule(d, beta);
    const auto m = achieved_marginals(rule, d);
    CHECK(m[0] >= 0.375 - 1e-9);
    CHECK(m[1] >= 0.375 - 1e-9);
    // Any optimal flow meets the targets exactly since the total equals the flow value.
    CHECK(m[0] == doctest::Approx(0.375).epsilon(1e-9));
    CHECK(m[1] == doctest::Approx(0.375).epsilon(1e-9));

    // Empirical pick frequency of a on {a, b} matches the constructed flow.
    const double pi_a = rule.pick_probability(3, 0);
    RngStream rng(2, 0);
    int picks = 0;
    for (int i = 0; i < 100'000; ++i) picks += apply_rule(rule, 3, rng) == std::optional<int>(0);
    CHECK(std::abs(picks / 1e5 - pi_a) <= 0.01);
    INFO("pi_a({a,b}) = " << pi_a);
    // The symmetric flow would give exactly one half.
    CHECK(pi_a + rule.pick_probability(3, 1) <= 1.0 + 1e-12);
  }

  TEST_CASE("infeasible single element names the witness") {
    const auto d = SubsetDistribution::product({4}, {0.5});
    const std::vector<double> beta{0.6};
    try {
      build_rule(d, beta);
      FAIL("expected Infeasible");
    } catch (const Infeasible& e) {
      CHECK(e.witness() == std::vector<int>{4});
      CHECK(e.hit_probability() == doctest::Approx(0.5));
      CHECK(e.target_sum() == doctest::Approx(0.6));
    }
  }

  TEST_CASE("degree cap") {
    std::vector<int> ground(5);
    std::vector<double> p(5, 0.5), beta(5, 0.01);
    for (int i = 0; i < 5; ++i) ground[i] = i;
    CHECK_THROWS_AS(build_rule(SubsetDistribution::product(ground, p), beta, 4), DegreeCapExceeded);
  }

  TEST_CASE("explicit atoms merge duplicates and reject bad mass") {
    const auto d = SubsetDistribution::explicit_atoms({0, 1}, {{1, 0.25}, {1, 0.25}, {2, 0.5}, {3, 0.0}});
    CHECK(d.atoms().size() == 2);
    CHECK_THROWS_AS(SubsetDistribution::explicit_atoms({0}, {{1, 0.5}}), InputError);
    CHECK_THROWS_AS(SubsetDistribution::explicit_atoms({0}, {{1, 1.5}, {0, -0.5}}), InputError);
  }

  TEST_CASE("apply on the empty set and unknown subsets selects nothing") {
    const auto d = SubsetDistribution::explicit_atoms({0, 1}, {{1, 0.5}, {0, 0.5}});
    const std::vector<double> beta{0.5, 0.0};
    const auto rule = build_rule(d, beta);
    CHECK(!rule.knows(2));
    RngStream rng(3, 0);
    CHECK(!apply_rule(rule, 0, rng).has_value());
    CHECK(!apply_rule(rule, 2, rng).has_value());
  }

  TEST_CASE("monotonize fixes the two-element rule and leaves monotone rules alone") {
    const auto d = SubsetDistribution::product({0, 1}, {0.5, 0.5});
    const std::vector<double> beta{0.375, 0.375};
    const auto rule = build_rule(d, beta);
    const auto res = monotonize(rule, d);
    CHECK(res.converged);
    CHECK(res.potential_after == doctest::Approx(0.0));
    CHECK(res.rule.pick_probability(3, 0) <= res.rule.pick_probability(1, 0) + 1e-12);
    CHECK(res.rule.pick_probability(3, 1) <= res.rule.pick_probability(2, 1) + 1e-12);
    const auto before = achieved_marginals(rule, d);
    const auto after = achieved_marginals(res.rule, d);
    CHECK(after[0] == doctest::Approx(before[0]).epsilon(1e-12));
    CHECK(after[1] == doctest::Approx(before[1]).epsilon(1e-12));

    const auto again = monotonize(res.rule, d);
    CHECK(again.transfers == 0);
    CHECK(again.potential_before == doctest::Approx(0.0));

    const auto single = SubsetDistribution::product({0}, {0.4});
    const std::vector<double> b1{0.2};
    CHECK(monotonize(build_rule(single, b1), single).transfers == 0);
  }

  TEST_CASE("min_cut_slack agrees with the exhaustive oracle") {
    RngStream rng(4, 0);
    for (int c = 0; c < 50; ++c) {
      const std::size_t k = 1 + rng.uniform_index(6);
      const auto d = props::random_distribution(k, rng);
      std::vector<double> beta(k);
      for (double& b : beta) b = 0.3 * rng.uniform();
      CHECK(min_cut_slack(d, beta).first == doctest::Approx(props::min_slack(d, beta)).epsilon(1e-9));
    }
  }

  TEST_CASE("flow/cut equivalence on small ground sets") {
    const auto tally = props::flow_cut_equivalence(5, 6, 40);
    INFO(tally.first_failure);
    CHECK(tally.violations == 0);
    CHECK(tally.cases > 200);
  }

  TEST_CASE("monotonize property on small ground sets") {
    const auto tally = props::monotonize_property(6, 4, 20);
    INFO(tally.first_failure);
    CHECK(tally.violations == 0);
  }

  TEST_CASE("rules serialize to JSON") {
    const auto d = SubsetDistribution::product({3, 9}, {0.5, 0.5});
    const std::vector<double> beta{0.375, 0.375};
    nlohmann::json j;
    to_json(j, build_rule(d, beta));
    CHECK(j.dump().find('9') != std::string::npos);
  }
}
