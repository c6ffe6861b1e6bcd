#include <benchmark/benchmark.h>

#include "crs/bipartite_schemes.hpp"
#include "crs/gw_tree.hpp"
#include "crs/sampling.hpp"
#include "crs/select_one.hpp"

using namespace crs;

namespace {

void BM_BuildRule(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<int> ground(k);
  std::vector<double> probs(k, 1.0 / static_cast<double>(k));
  for (std::size_t i = 0; i < k; ++i) ground[i] = static_cast<int>(i);
  const auto dist = SubsetDistribution::product(ground, probs);
  std::vector<double> beta(k);
  for (std::size_t i = 0; i < k; ++i) beta[i] = 0.5 * dist.hit_probability(SubsetMask{1} << i);
  for (auto _ : state) benchmark::DoNotOptimize(build_rule(dist, beta));

}
BENCHMARK(BM_BuildRule)->DenseRange(4, 12, 4);

void BM_GwTreeKs(benchmark::State& state) {
  GwTree tree;
  TreeKsWorkspace ws;
  std::uint64_t t = 0;
  for (auto _ : state) {
    RngStream rng(1, t++);
    sample_tree(rng, tree);
    if (!tree.truncated) benchmark::DoNotOptimize(ks_first_stage(tree, rng, ws, true));
  }
}
BENCHMARK(BM_GwTreeKs);

void BM_RbgPipeline(benchmark::State& state) {
  RngStream gen(2, 0);
  const auto fm = gen_random_bipartite(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)), 4, gen);
  SchemeOptions opts;
  opts.step6 = Step6Mode::uniform;
  const RbgScheme scheme(fm, opts);
  std::uint64_t t = 0;
  for (auto _ : state) {
    RngStream rng(3, t++);
    const auto r = sample_r(scheme.instance(), rng);
    benchmark::DoNotOptimize(scheme.run_full(r, rng));
  }
}
BENCHMARK(BM_RbgPipeline)->Arg(10)->Arg(100);

}  // namespace
BENCHMARK_MAIN();
