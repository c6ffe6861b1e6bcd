#include "crs/evaluation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "crs/error.hpp"
#include "crs/gw_tree.hpp"
#include "crs/karp_sipser.hpp"

namespace crs {
namespace {

constexpr double kE = std::numbers::e;

std::vector<EdgeId> positive_edges(const FractionalMatching& fm, std::size_t count) {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < count; ++e) {
    if (fm.x(e) > 0.0) out.push_back(e);
  }
  return out;
}

std::vector<ExactEdge> finish(const Scheme& scheme, const std::vector<double>& prob) {
  std::vector<ExactEdge> out;
  const auto& c = scheme.completion();
  for (EdgeId e : positive_edges(c.instance, c.original_edge_count)) {
    const double x = c.instance.x(e);
    out.push_back({e, x, prob[e], prob[e] / x});
  }
  return out;
}

std::vector<double> exact_simple(const SimpleScheme& s) {
  const FractionalMatching& fm = s.instance();
  const Graph& g = fm.graph();
  const std::size_t m = g.edge_count();
  if (m > 12) throw TooLarge("exact simple-scheme evaluation is capped at 12 completed edges, got " + std::to_string(m));
  const auto pos = positive_edges(fm, m);
  std::vector<double> prob(m, 0.0);
  std::vector<std::uint8_t> active(m);
  std::vector<std::uint32_t> count(g.vertex_count());
  std::vector<double> sel_u(m), sel_v(m);
  for (std::uint32_t pattern = 0; pattern < (1u << pos.size()); ++pattern) {
    double w = 1.0;
    std::fill(active.begin(), active.end(), 0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double a = -std::expm1(-fm.x(pos[i]));
      if ((pattern >> i) & 1) {
        w *= a;
        active[pos[i]] = 1;
        ++count[g.edge(pos[i]).u];
        ++count[g.edge(pos[i]).v];
      } else {
        w *= 1.0 - a;
      }
    }
    if (w == 0.0) continue;
    std::fill(sel_u.begin(), sel_u.end(), 0.0);
    std::fill(sel_v.begin(), sel_v.end(), 0.0);
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      const auto& ground = s.index().ground[v];
      SubsetMask mask = 0;
      for (std::size_t i = 0; i < ground.size(); ++i) {
        if (active[ground[i]] && count[g.other(ground[i], v)] == 1) mask |= SubsetMask{1} << i;
      }
      for (std::size_t i = 0; i < ground.size(); ++i) {
        const EdgeId e = ground[i];
        (g.edge(e).u == v ? sel_u : sel_v)[e] = s.rule(v).pick_probability(mask, i);
      }
    }
    for (EdgeId e : pos) prob[e] += w * (1.0 - (1.0 - sel_u[e]) * (1.0 - sel_v[e]));
  }
  return prob;
}

std::vector<double> exact_two_stage(const TwoStageScheme& s) {
  const FractionalMatching& fm = s.instance();
  const Graph& g = fm.graph();
  std::vector<double> prob(g.edge_count(), 0.0);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.side(v) != Side::right) continue;
    const auto& ground = s.index().ground[v];
    std::vector<double> p;
    for (EdgeId e : ground) p.push_back(std::clamp(s.stage1_marginals()[e], 0.0, 1.0));
    const auto got = achieved_marginals(
        s.rule(v), SubsetDistribution::product(std::vector<int>(ground.begin(), ground.end()), p));
    for (std::size_t i = 0; i < ground.size(); ++i) prob[ground[i]] = got[i];
  }
  return prob;
}

// Probability that each edge is matched by the first stage from a given set
// of alive edges, averaging over the uniform choice of degree-1 vertex.
class KsBranching {
 public:
  explicit KsBranching(const Graph& g) : g_(g) {}

  const std::vector<double>& from(std::uint32_t alive) {
    if (auto it = memo_.find(alive); it != memo_.end()) return it->second;
    const std::size_t m = g_.edge_count();
    std::vector<double> out(m, 0.0);
    std::vector<std::uint32_t> degree(g_.vertex_count(), 0);
    for (EdgeId e = 0; e < m; ++e) {
      if ((alive >> e) & 1) {
        ++degree[g_.edge(e).u];
        ++degree[g_.edge(e).v];
      }
    }
    std::vector<VertexId> leaves;
    for (VertexId v = 0; v < g_.vertex_count(); ++v) {
      if (degree[v] == 1) leaves.push_back(v);
    }
    for (VertexId v : leaves) {
      EdgeId e = 0;
      for (EdgeId f : g_.incident(v)) {
        if ((alive >> f) & 1) e = f;
      }
      std::uint32_t next = alive;
      for (VertexId end : {g_.edge(e).u, g_.edge(e).v}) {
        for (EdgeId f : g_.incident(end)) next &= ~(1u << f);
      }
      const double w = 1.0 / static_cast<double>(leaves.size());
      const auto rest = from(next);  // copy: recursion may rehash the memo
      out[e] += w;
      for (EdgeId f = 0; f < m; ++f) out[f] += w * rest[f];
    }
    return memo_.emplace(alive, std::move(out)).first->second;
  }

 private:
  const Graph& g_;
  std::unordered_map<std::uint32_t, std::vector<double>> memo_;
};

std::vector<double> exact_karp_sipser(const KarpSipserScheme& s) {
  const FractionalMatching& fm = s.instance();
  const Graph& g = fm.graph();
  const std::size_t m = g.edge_count();
  if (m > 8) throw TooLarge("exact Karp-Sipser evaluation is capped at 8 edges, got " + std::to_string(m));
  const auto pos = positive_edges(fm, m);
  KsBranching ks(g);
  std::vector<double> prob(m, 0.0);
  for (std::uint32_t pattern = 0; pattern < (1u << pos.size()); ++pattern) {
    double w = 1.0;
    std::uint32_t alive = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const double x = fm.x(pos[i]);
      if ((pattern >> i) & 1) {
        w *= x;
        alive |= 1u << pos[i];
      } else {
        w *= 1.0 - x;
      }
    }
    if (w == 0.0) continue;
    const auto& p = ks.from(alive);
    for (EdgeId e = 0; e < m; ++e) prob[e] += w * p[e];
  }
  return prob;
}

double standard_error(std::uint64_t hits, std::uint64_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

BalancednessReport mc_balancedness(const Scheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                   unsigned threads, std::span<const EdgeId> probe) {
  const auto& c = scheme.completion();
  const FractionalMatching& fm = c.instance;
  std::vector<EdgeId> edges(probe.begin(), probe.end());
  if (edges.empty()) edges = positive_edges(fm, c.original_edge_count);
  for (EdgeId e : edges) {
    if (e >= c.original_edge_count) throw InputError("probe edge " + std::to_string(e) + " does not exist");
    if (!(fm.x(e) > 0.0)) throw EdgeNeverAppears(e);
  }

  threads = std::max(1u, threads);
  const std::uint64_t unknown_before = scheme.unknown_subsets();
  BalancednessReport report;
  report.scheme = scheme.name();
  report.seed = seed;
  report.trials = trials;
  const GraphView view = fm.graph().view();
  for (EdgeId e : edges) {
    struct Counts {
      std::uint64_t selected = 0;
      std::uint64_t invalid = 0;
    };
    std::vector<Counts> counts(threads);
    for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
      RngStream rng = RngStream(seed, t).derive(e);
      const RealizedSet r = sample_r_planted(fm, e, rng);
      const Matching m = scheme.run_full(r, rng);
      bool ok = is_matching(view, m);
      for (EdgeId f : m) ok = ok && r.contains(f);
      if (!ok) ++counts[w].invalid;
      if (std::find(m.begin(), m.end(), e) != m.end()) ++counts[w].selected;
    });
    EdgeEstimate est;
    est.edge = e;
    est.x = fm.x(e);
    est.trials = est.present = trials;
    for (const Counts& k : counts) {
      est.selected += k.selected;
      report.invalid_matchings += k.invalid;
    }
    est.estimate = trials ? static_cast<double>(est.selected) / static_cast<double>(trials) : 0.0;
    est.standard_error = standard_error(est.selected, trials);
    est.ci = wilson_interval(est.selected, trials);
    report.min_estimate = std::min(report.min_estimate, est.estimate);
    report.min_ci_low = std::min(report.min_ci_low, est.ci.low);
    report.edges.push_back(est);
  }
  report.unknown_subsets = scheme.unknown_subsets() - unknown_before;
  return report;
}

std::vector<ExactEdge> exact_balancedness(const Scheme& scheme) {
  if (const auto* s = dynamic_cast<const SimpleScheme*>(&scheme)) return finish(scheme, exact_simple(*s));
  if (const auto* s = dynamic_cast<const TwoStageScheme*>(&scheme)) return finish(scheme, exact_two_stage(*s));
  if (const auto* s = dynamic_cast<const RbgScheme*>(&scheme)) {
    if (s->step6_mode() != Step6Mode::exact) {
      throw InputError("exact evaluation of the red/blue/gray scheme needs exact step 6");
    }
    return finish(scheme, s->exact_marginals().matched);
  }
  if (const auto* s = dynamic_cast<const KarpSipserScheme*>(&scheme)) return finish(scheme, exact_karp_sipser(*s));
  throw InputError("no exact evaluator for scheme " + scheme.name());
}

std::pair<double, double> lem_bound_sides(std::span<const double> x) {
  double miss = 1.0;
  double rhs = 0.0;
  const double slope = 1.0 - std::exp(-1.0 / kE) - 1.0 / (2.0 * kE * kE);
  for (double xi : x) {
    miss *= 1.0 - std::expm1(xi) / kE;
    rhs += xi * slope + (std::exp(2.0 * xi) - std::exp(xi)) / (2.0 * kE * kE);
  }
  return {1.0 - miss, rhs};
}

LemBoundReport check_lem_bound(std::uint64_t samples, std::uint64_t seed, double slack) {
  LemBoundReport report;
  report.samples = samples;
  report.min_slack = std::numeric_limits<double>::infinity();
  std::vector<double> x;
  for (std::uint64_t t = 0; t < samples; ++t) {
    RngStream rng(seed, t);
    const std::size_t n = 1 + rng.uniform_index(12);
    x.assign(n, 0.0);
    switch (t % 4) {
      case 0:
      case 1: {
        double sum = 0.0;
        for (double& xi : x) sum += (xi = -std::log1p(-rng.uniform()));
        const double scale = t % 4 == 0 ? rng.uniform() : 1.0;
        for (double& xi : x) xi = sum > 0.0 ? xi / sum * scale : 0.0;
        break;
      }
      case 2:
        x[rng.uniform_index(n)] = 1.0;
        break;
      default: {
        const double total = rng.bernoulli(0.5) ? 1.0 : rng.uniform();
        std::fill(x.begin(), x.end(), total / static_cast<double>(n));
      }
    }
    const auto [lhs, rhs] = lem_bound_sides(x);
    if (lhs - rhs < report.min_slack) {
      report.min_slack = lhs - rhs;
      report.worst = x;
    }
    if (lhs < rhs - slack) ++report.violations;
  }
  if (samples == 0) report.min_slack = 0.0;
  return report;
}

DensityReport density_experiment(const FractionalMatching& fm, std::uint64_t trials, std::uint64_t seed,
                                 unsigned threads, bool with_max_matching) {
  threads = std::max(1u, threads);
  struct Worker {
    KsWorkspace ws;
    std::uint64_t ks = 0;
    std::uint64_t max = 0;
  };
  std::vector<Worker> workers(threads);
  const GraphView view = fm.graph().view();
  for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
    RngStream rng(seed, t);
    const RealizedSet r = sample_r(fm, rng);
    workers[w].ks += ks_first_stage(view, r.flags(), rng, workers[w].ws).size();
    if (with_max_matching) workers[w].max += max_matching(view, r.flags()).size();
  });
  DensityReport report;
  report.trials = trials;
  report.vertices = fm.graph().vertex_count();
  report.max_computed = with_max_matching;
  std::uint64_t ks = 0;
  std::uint64_t max = 0;
  for (const Worker& w : workers) {
    ks += w.ks;
    max += w.max;
  }
  const double t = static_cast<double>(std::max<std::uint64_t>(trials, 1));
  const double n = static_cast<double>(std::max<std::size_t>(report.vertices, 1));
  report.mean_ks = static_cast<double>(ks) / t;
  report.ks_per_vertex = report.mean_ks / n;
  if (with_max_matching) {
    report.mean_max = static_cast<double>(max) / t;
    report.mean_gap = static_cast<double>(max - ks) / t;
    report.max_per_vertex = report.mean_max / n;
  }
  report.target_per_vertex = solve_lambda().max_match_density;
  return report;
}

ConjectureReport conjecture_probe(const std::vector<DoublyStochasticMatrix>& matrices, std::uint64_t trials,
                                  std::uint64_t seed, unsigned threads) {
  if (matrices.empty()) throw InputError("conjecture probe needs at least one matrix");
  const std::size_t n = matrices.front().n();
  for (const auto& a : matrices) {
    if (a.n() != n) throw InputError("conjecture probe matrices must share one dimension");
  }
  threads = std::max(1u, threads);
  auto estimate = [&](const FractionalMatching& fm, std::uint64_t tag, std::size_t index) {
    struct Sums {
      std::uint64_t sum = 0;
      std::uint64_t squares = 0;
    };
    std::vector<Sums> sums(threads);
    const GraphView view = fm.graph().view();
    for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
      RngStream rng = RngStream(seed, t).derive(tag);
      const RealizedSet r = sample_r(fm, rng);
      const std::uint64_t size = max_matching(view, r.flags()).size();
      sums[w].sum += size;
      sums[w].squares += size * size;
    });
    std::uint64_t sum = 0;
    std::uint64_t squares = 0;
    for (const Sums& s : sums) {
      sum += s.sum;
      squares += s.squares;
    }
    ConjectureRow row;
    row.index = index;
    const double tt = static_cast<double>(std::max<std::uint64_t>(trials, 1));
    row.mean = static_cast<double>(sum) / tt;
    const double var = std::max(0.0, static_cast<double>(squares) / tt - row.mean * row.mean);
    row.standard_error = trials > 1 ? std::sqrt(var * tt / (tt - 1.0) / tt) : 0.0;
    row.ci = {row.mean - kZ99 * row.standard_error, row.mean + kZ99 * row.standard_error};
    return row;
  };

  ConjectureReport report;
  report.n = n;
  report.trials = trials;
  report.uniform = estimate(gen_uniform_knn(n), 0, matrices.size());
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    ConjectureRow row = estimate(matrices[i].to_fractional_matching(), i + 1, i);
    row.flagged = row.ci.high < report.uniform.ci.low;
    report.flags += row.flagged;
    report.rows.push_back(row);
  }
  return report;
}

std::vector<BluePair> blue_pair_correlation(const RbgScheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                            unsigned threads) {
  const FractionalMatching& fm = scheme.instance();
  const Graph& g = fm.graph();
  std::vector<std::pair<EdgeId, EdgeId>> pairs;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.side(v) != Side::right) continue;
    const auto& ground = scheme.index().ground[v];
    for (std::size_t i = 0; i < ground.size(); ++i) {
      for (std::size_t j = i + 1; j < ground.size(); ++j) pairs.emplace_back(ground[i], ground[j]);
    }
  }
  threads = std::max(1u, threads);
  // Per pair: both blue, then (e in R2, f in R2) cells 10, 01, 11.
  std::vector<std::vector<std::uint64_t>> cells(threads, std::vector<std::uint64_t>(4 * pairs.size(), 0));
  for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
    RngStream rng(seed, t);
    const RealizedSet r = sample_r(fm, rng);
    const ColoredState st = scheme.run_left(r, rng);
    std::vector<std::uint8_t> in_r2(g.edge_count(), 0);
    for (EdgeId e : st.r2) in_r2[e] = 1;
    auto& c = cells[w];
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [e, f] = pairs[p];
      if (st.color[e] != EdgeColor::blue || st.color[f] != EdgeColor::blue) continue;
      ++c[4 * p];
      if (in_r2[e] && !in_r2[f]) ++c[4 * p + 1];
      if (!in_r2[e] && in_r2[f]) ++c[4 * p + 2];
      if (in_r2[e] && in_r2[f]) ++c[4 * p + 3];
    }
  });

  std::vector<BluePair> out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::uint64_t k[4] = {0, 0, 0, 0};
    for (const auto& c : cells) {
      for (int i = 0; i < 4; ++i) k[i] += c[4 * p + static_cast<std::size_t>(i)];
    }
    BluePair bp;
    bp.e = pairs[p].first;
    bp.f = pairs[p].second;
    bp.both_blue = k[0];
    if (k[0] > 0) {
      const double n = static_cast<double>(k[0]);
      const double q10 = static_cast<double>(k[1]) / n;
      const double q01 = static_cast<double>(k[2]) / n;
      const double q11 = static_cast<double>(k[3]) / n;
      const double q00 = 1.0 - q10 - q01 - q11;
      bp.p_e = q10 + q11;
      bp.p_f = q01 + q11;
      bp.p_ef = q11;
      // Influence of one observation (a, b) on p_ef - p_e p_f.
      auto phi = [&](double a, double b) { return a * b - bp.p_ef - bp.p_f * (a - bp.p_e) - bp.p_e * (b - bp.p_f); };
      const double var = q00 * std::pow(phi(0, 0), 2) + q10 * std::pow(phi(1, 0), 2) +
                         q01 * std::pow(phi(0, 1), 2) + q11 * std::pow(phi(1, 1), 2);
      bp.se = std::sqrt(var / n);
    }
    out.push_back(bp);
  }
  return out;
}

StageFrequencies stage_frequencies(const RbgScheme& scheme, std::uint64_t trials, std::uint64_t seed,
                                   unsigned threads) {
  const FractionalMatching& fm = scheme.instance();
  const std::size_t m = fm.graph().edge_count();
  threads = std::max(1u, threads);
  std::vector<StageFrequencies> parts(threads);
  for (auto& p : parts) {
    for (auto* v : {&p.gray, &p.red, &p.blue, &p.r1, &p.r2, &p.r3, &p.matched}) v->assign(m, 0);
  }
  for_each_trial(trials, threads, [&](std::uint64_t t, unsigned w) {
    RngStream rng(seed, t);
    const RealizedSet r = sample_r(fm, rng);
    const ColoredState st = scheme.run_colored(r, rng);
    auto& p = parts[w];
    for (EdgeId e = 0; e < m; ++e) {
      p.gray[e] += st.color[e] == EdgeColor::gray;
      p.red[e] += st.color[e] == EdgeColor::red;
      p.blue[e] += st.color[e] == EdgeColor::blue;
    }
    for (EdgeId e : st.r1) ++p.r1[e];
    for (EdgeId e : st.r2) ++p.r2[e];
    for (EdgeId e : st.r3) ++p.r3[e];
    for (EdgeId e : st.final) ++p.matched[e];
  });
  StageFrequencies out;
  out.trials = trials;
  for (auto* v : {&out.gray, &out.red, &out.blue, &out.r1, &out.r2, &out.r3, &out.matched}) v->assign(m, 0);
  for (const auto& p : parts) {
    for (EdgeId e = 0; e < m; ++e) {
      out.gray[e] += p.gray[e];
      out.red[e] += p.red[e];
      out.blue[e] += p.blue[e];
      out.r1[e] += p.r1[e];
      out.r2[e] += p.r2[e];
      out.r3[e] += p.r3[e];
      out.matched[e] += p.matched[e];
    }
  }
  return out;
}

}  // namespace crs
