#include <cmath>

#include "crs/error.hpp"
#include "crs/sampling.hpp"
#include "doctest.h"

using namespace crs;

namespace {

FractionalMatching k22(double x) {
  return FractionalMatching(Graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}), {x, x, x, x});
}

}  // namespace

TEST_SUITE("sampling") {
  TEST_CASE("streams are reproducible and independent of derivation order") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    RngStream c(42, 7);
    const auto d1 = c.derive(3);
    for (int i = 0; i < 10; ++i) c();
    const auto d2 = c.derive(3);
    RngStream x = d1, y = d2;
    for (int i = 0; i < 10; ++i) CHECK(x() == y());
    CHECK(RngStream(42, 7)() != RngStream(42, 8)());
    CHECK(RngStream(42, 7)() != RngStream(43, 7)());
  }

  TEST_CASE("uniform lies in [0, 1)") {
    RngStream rng(1, 1);
    for (int i = 0; i < 10000; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("sample_r degenerate weights") {
    RngStream rng(2, 0);
    const auto zero = k22(0.0);
    const auto full = k22(1.0);
    for (int t = 0; t < 100; ++t) {
      CHECK(sample_r(zero, rng).size() == 0);
      CHECK(sample_r(full, rng).size() == 4);
    }
  }

  TEST_CASE("sample_r on K22 at one half gives the full set with probability 1/16") {
    const auto fm = k22(0.5);
    std::uint64_t full = 0;
    const std::uint64_t trials = 100'000;
    for (std::uint64_t t = 0; t < trials; ++t) {
      RngStream rng(3, t);
      full += sample_r(fm, rng).size() == 4;
    }
    CHECK(std::abs(static_cast<double>(full) / trials - 0.0625) <= 0.005);
  }

  TEST_CASE("sample_r marginals are within 4 standard errors") {
    RngStream gen(4, 0);
    const auto fm = gen_random_bipartite(6, 6, 3, gen);
    const std::uint64_t trials = 100'000;
    std::vector<std::uint64_t> count(fm.graph().edge_count(), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
      RngStream rng(4, t);
      const auto r = sample_r(fm, rng);
      for (EdgeId e = 0; e < count.size(); ++e) count[e] += r.contains(e);
    }
    for (EdgeId e = 0; e < count.size(); ++e) {
      const double x = fm.x(e);
      const double se = std::sqrt(x * (1 - x) / trials);
      CHECK(std::abs(static_cast<double>(count[e]) / trials - x) <= 4 * se + 1e-12);
    }
  }

  TEST_CASE("planted sampling") {
    const auto lonely = FractionalMatching(Graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}), {0.3, 0.0, 0.0, 0.0});
    for (std::uint64_t t = 0; t < 100; ++t) {
      RngStream rng(5, t);
      const auto r = sample_r_planted(lonely, 0, rng);
      CHECK(r.size() == 1);
      CHECK(r.contains(0));
    }
    CHECK_THROWS_AS([&] {
      RngStream rng(5, 0);
      sample_r_planted(lonely, 1, rng);
    }(), EdgeNeverAppears);

    const auto ones = FractionalMatching(Graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}), {1.0, 0.2, 0.7, 0.4});
    for (std::uint64_t t = 0; t < 100; ++t) {
      RngStream a(6, t), b(6, t);
      CHECK(sample_r_planted(ones, 0, a) == sample_r(ones, b));
    }

    const auto fm = k22(0.5);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < 10'000; ++t) {
      RngStream rng(7, t);
      hits += sample_r_planted(fm, 0, rng).contains(1);
    }
    CHECK(std::abs(hits / 1e4 - 0.5) <= 0.01);
  }

  TEST_CASE("for_each_trial gives identical per-trial results for any thread count") {
    const auto fm = k22(0.5);
    auto run = [&](unsigned threads) {
      std::vector<std::size_t> sizes(5000);
      for_each_trial(sizes.size(), threads, [&](std::uint64_t t, unsigned) {
        RngStream rng(8, t);
        sizes[t] = sample_r(fm, rng).size();
      });
      return sizes;
    };
    const auto one = run(1);
    CHECK(one == run(3));
    CHECK(one == run(8));
  }

  TEST_CASE("wilson interval") {
    const auto ci = wilson_interval(50, 100);
    CHECK(ci.low < 0.5);
    CHECK(ci.high > 0.5);
    CHECK(ci.low == doctest::Approx(0.3753).epsilon(1e-3));
    const auto zero = wilson_interval(0, 1000);
    CHECK(zero.low == 0.0);
    CHECK(zero.high < 0.01);
  }
}
