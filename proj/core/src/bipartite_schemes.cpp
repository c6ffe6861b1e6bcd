#include "crs/bipartite_schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>
#include <unordered_map>

#include "crs/error.hpp"

namespace crs {
namespace {

constexpr double kE = std::numbers::e;
constexpr std::uint64_t kCalibrationTag = 0xCA11'B8A7'E5EEDULL;

void check_degree(VertexId v, std::size_t k, std::size_t cap) {
  if (k > cap) {
    throw DegreeCapExceeded("vertex " + std::to_string(v) + " has " + std::to_string(k) +
                                " candidate edges, above the degree cap " + std::to_string(cap),
                            v, k, cap);
  }
}

void require_bipartite(const FractionalMatching& fm, const std::string& scheme) {
  if (!fm.graph().has_bipartition()) {
    throw InputError("the " + scheme + " scheme needs a bipartite instance");
  }
}

SelectionRule product_rule(const FractionalMatching& fm, const std::vector<EdgeId>& ground, VertexId v,
                           std::size_t cap, auto&& presence, auto&& target) {
  check_degree(v, ground.size(), cap);
  std::vector<int> ids(ground.begin(), ground.end());
  std::vector<double> p;
  std::vector<double> beta;
  for (EdgeId e : ground) {
    p.push_back(std::clamp(presence(e, fm.x(e)), 0.0, 1.0));
    beta.push_back(target(e, fm.x(e)));
  }
  return build_rule(SubsetDistribution::product(std::move(ids), std::move(p)), beta, cap);
}

// Hands the "select nothing" remainder of every non-empty subset to its
// elements, proportionally to their current probabilities.
SelectionRule fill_remainder(SelectionRule rule) {
  const std::vector<SubsetMask> masks(rule.masks().begin(), rule.masks().end());
  for (SubsetMask s : masks) {
    if (s == 0) continue;
    std::vector<double> row;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      if (!((s >> i) & 1u)) continue;
      row.push_back(rule.pick_probability(s, i));
      sum += row.back();
    }
    for (double& p : row) p = sum > 0.0 ? p / sum : 1.0 / static_cast<double>(row.size());
    rule.set_row(s, row);
  }
  return rule;
}

Matching strip(Matching m, const LoadCompletion& c) {
  std::erase_if(m, [&](EdgeId e) { return c.is_dummy(e); });
  return m;
}

}  // namespace

SchemeConstants compute_constants() {
  SchemeConstants c;
  const double a = std::exp(-1.0 / kE);
  const double b = std::exp(-1.0);
  c.beta = (a - b) / (1.0 - b);
  c.gamma = (1.0 - a) - b * (4.0 * c.beta - 2.0 * c.beta * c.beta) + (2.0 * c.beta - c.beta * c.beta);
  c.simple_factor = 2.0 * (1.0 - a) - std::exp(-2.0);
  c.two_stage_factor = 1.0 - std::exp(-(1.0 - 1.0 / kE));
  return c;
}

std::string to_string(Step6Mode mode) {
  switch (mode) {
    case Step6Mode::exact: return "exact";
    case Step6Mode::calibrated: return "calibrated";
    case Step6Mode::uniform: return "uniform";
  }
  return "?";
}

Step6Mode parse_step6_mode(const std::string& name) {
  if (name == "exact") return Step6Mode::exact;
  if (name == "calibrated") return Step6Mode::calibrated;
  if (name == "uniform") return Step6Mode::uniform;
  throw InputError("unknown step-6 mode '" + name + "' (expected exact, calibrated or uniform)");
}

Matching Scheme::run(const RealizedSet& realized, RngStream& rng) const {
  return strip(run_full(realized, rng), completion_);
}

LocalIndex::LocalIndex(const FractionalMatching& fm) {
  const Graph& g = fm.graph();
  ground.resize(g.vertex_count());
  pos_u.assign(g.edge_count(), -1);
  pos_v.assign(g.edge_count(), -1);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    for (EdgeId e : g.incident(v)) {
      if (!(fm.x(e) > 0.0)) continue;
      (g.edge(e).u == v ? pos_u : pos_v)[e] = static_cast<std::int32_t>(ground[v].size());
      ground[v].push_back(e);
    }
  }
}

// ---------------------------------------------------------------- simple

double SimpleScheme::activation(double x) { return x > 0.0 ? -std::expm1(-x) / x : 1.0; }

double SimpleScheme::target(double x) {
  return x * ((1.0 - std::exp(-1.0 / kE)) - 1.0 / (2.0 * kE * kE)) +
         (std::exp(2.0 * x) - std::exp(x)) / (2.0 * kE * kE);
}

SimpleScheme::SimpleScheme(const FractionalMatching& fm, const SchemeOptions& options)
    : Scheme(complete_loads(fm)), index_(instance()) {
  const Graph& g = instance().graph();
  if (!g.has_bipartition() && !is_triangle_free(g)) {
    throw InputError("the simple scheme needs a triangle-free instance");
  }
  rules_.resize(g.vertex_count());
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    rules_[v] = fill_remainder(product_rule(
        instance(), index_.ground[v], v, options.degree_cap,
        [&](EdgeId e, double) { return availability(e, v); }, [](EdgeId, double x) { return target(x); }));
  }
}

double SimpleScheme::availability(EdgeId e, VertexId at) const {
  const double x = instance().x(e);
  const VertexId other = instance().graph().other(e, at);
  return -std::expm1(-x) * std::exp(-(instance().load(other) - x));
}

Matching SimpleScheme::run_full(const RealizedSet& realized, RngStream& rng) const {
  const Graph& g = instance().graph();
  std::vector<std::uint8_t> active(g.edge_count(), 0);
  std::vector<std::uint32_t> active_count(g.vertex_count(), 0);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (!realized.contains(e) || index_.pos_u[e] < 0) continue;
    if (rng.uniform() < activation(instance().x(e))) {
      active[e] = 1;
      ++active_count[g.edge(e).u];
      ++active_count[g.edge(e).v];
    }
  }
  Matching out;
  for (VertexId w = 0; w < g.vertex_count(); ++w) {
    const auto& ground = index_.ground[w];
    SubsetMask mask = 0;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      const EdgeId e = ground[i];
      if (active[e] && active_count[g.other(e, w)] == 1) mask |= SubsetMask{1} << i;
    }
    if (mask == 0) continue;
    const int pick = rules_[w].apply_local(mask, rng);
    if (pick < 0) continue;
    const EdgeId e = ground[static_cast<std::size_t>(pick)];
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------- two-stage

TwoStageScheme::TwoStageScheme(const FractionalMatching& fm, const SchemeOptions& options)
    : Scheme(complete_loads(fm)), index_(instance()) {
  require_bipartite(instance(), "two-stage");
  const Graph& g = instance().graph();
  rules_.resize(g.vertex_count());
  stage1_.assign(g.edge_count(), 0.0);
  const double first = 1.0 - 1.0 / kE;
  const double second = 1.0 - std::exp(-first);
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (g.side(u) != Side::left) continue;
    rules_[u] = product_rule(
        instance(), index_.ground[u], u, options.degree_cap, [](EdgeId, double x) { return x; },
        [&](EdgeId, double x) { return first * x; });
    const auto& ground = index_.ground[u];
    const auto marg = achieved_marginals(
        rules_[u], SubsetDistribution::product(std::vector<int>(ground.begin(), ground.end()),
                                               [&] {
                                                 std::vector<double> p;
                                                 for (EdgeId e : ground) p.push_back(instance().x(e));
                                                 return p;
                                               }()));
    for (std::size_t i = 0; i < ground.size(); ++i) stage1_[ground[i]] = marg[i];
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.side(v) != Side::right) continue;
    rules_[v] = product_rule(
        instance(), index_.ground[v], v, options.degree_cap,
        [&](EdgeId e, double) { return stage1_[e]; }, [&](EdgeId, double x) { return second * x; });
  }
}

Matching TwoStageScheme::run_full(const RealizedSet& realized, RngStream& rng) const {
  const Graph& g = instance().graph();
  std::vector<std::uint8_t> survived(g.edge_count(), 0);
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (g.side(u) != Side::left) continue;
    const auto& ground = index_.ground[u];
    SubsetMask mask = 0;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      if (realized.contains(ground[i])) mask |= SubsetMask{1} << i;
    }
    const int pick = rules_[u].apply_local(mask, rng);
    if (pick >= 0) survived[ground[static_cast<std::size_t>(pick)]] = 1;
  }
  Matching out;
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.side(v) != Side::right) continue;
    const auto& ground = index_.ground[v];
    SubsetMask mask = 0;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      if (survived[ground[i]]) mask |= SubsetMask{1} << i;
    }
    const int pick = rules_[v].apply_local(mask, rng);
    if (pick >= 0) out.push_back(ground[static_cast<std::size_t>(pick)]);
  }
  return out;
}

// ---------------------------------------------------------------- red/blue/gray

double RbgScheme::gray_coin(double x) { return x > 0.0 ? (x + std::expm1(-x)) / x : 0.0; }

double RbgScheme::red_coin(EdgeId e) const {
  const double x = instance().x(e);
  const double unique_active = std::expm1(x) * std::exp(-instance().load(right_[e]));
  if (!(unique_active > 0.0)) return 0.0;
  return std::clamp(-std::expm1(-x / kE) / unique_active, 0.0, 1.0);
}

RbgScheme::RbgScheme(const FractionalMatching& fm, const SchemeOptions& options)
    : Scheme(complete_loads(fm)), options_(options), index_(instance()) {
  require_bipartite(instance(), "red/blue/gray");
  const Graph& g = instance().graph();
  const std::size_t m = g.edge_count();
  left_.resize(m);
  right_.resize(m);
  pos_left_.resize(m);
  pos_right_.resize(m);
  for (EdgeId e = 0; e < m; ++e) {
    const Edge& ed = g.edge(e);
    const bool u_left = g.side(ed.u) == Side::left;
    left_[e] = u_left ? ed.u : ed.v;
    right_[e] = u_left ? ed.v : ed.u;
    pos_left_[e] = u_left ? index_.pos_u[e] : index_.pos_v[e];
    pos_right_[e] = u_left ? index_.pos_v[e] : index_.pos_u[e];
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) check_degree(v, index_.ground[v].size(), options_.degree_cap);
  build_left_rules();
  final_.resize(g.vertex_count());
  arrivals_.resize(g.vertex_count());
  switch (options_.step6) {
    case Step6Mode::exact: build_exact_step6(); break;
    case Step6Mode::calibrated: build_calibrated_step6(); break;
    case Step6Mode::uniform: break;
  }
}

void RbgScheme::build_left_rules() {
  const Graph& g = instance().graph();
  const std::size_t n = g.vertex_count();
  red_.resize(n);
  blue_.resize(n);
  gray_.resize(n);
  const double red_factor = 1.0 - std::exp(-1.0 / kE);
  const double blue_rate = 1.0 - 1.0 / kE;
  const double blue_factor = 1.0 - std::exp(-blue_rate);
  const std::size_t cap = options_.degree_cap;
  for (VertexId u = 0; u < n; ++u) {
    if (g.side(u) != Side::left) continue;
    const auto& ground = index_.ground[u];
    red_[u] = product_rule(
        instance(), ground, u, cap, [](EdgeId, double x) { return -std::expm1(-x / kE); },
        [&](EdgeId, double x) { return red_factor * x; });

    // Blue edges given no red edge at u: independent, each with 1 - e^{-(1-1/e)x}.
    std::vector<double> p;
    for (EdgeId e : ground) p.push_back(-std::expm1(-blue_rate * instance().x(e)));
    const auto blue_dist = SubsetDistribution::product(std::vector<int>(ground.begin(), ground.end()), p);
    const SelectionRule raw = product_rule(
        instance(), ground, u, cap, [&](EdgeId, double x) { return -std::expm1(-blue_rate * x); },
        [&](EdgeId, double x) { return blue_factor * x; });
    MonotonizeResult mono = monotonize(raw, blue_dist);
    if (!mono.converged) ++unconverged_blue_;
    blue_[u] = std::move(mono.rule);

    // Gray edges given no active edge at u: each present and gray with
    // (x - 1 + e^{-x}) / e^{-x}.
    gray_[u] = product_rule(
        instance(), ground, u, cap, [](EdgeId, double x) { return (x + std::expm1(-x)) * std::exp(x); },
        [](EdgeId, double x) { return 0.5 * x * x; });
  }
}

int RbgScheme::pick_left(VertexId u, SubsetMask red, SubsetMask blue, SubsetMask gray, RngStream& rng,
                         int& stage) const {
  if (red) {
    stage = 1;
    return red_[u].apply_local(red, rng);
  }
  if (blue) {
    stage = 2;
    return blue_[u].apply_local(blue, rng);
  }
  if (gray) {
    stage = 3;
    return gray_[u].apply_local(gray, rng);
  }
  stage = 0;
  return -1;
}

ColoredState RbgScheme::run_left(const RealizedSet& realized, RngStream& rng) const {
  const Graph& g = instance().graph();
  const std::size_t m = g.edge_count();
  ColoredState st;
  st.color.assign(m, EdgeColor::absent);
  std::vector<std::uint32_t> active_at_right(g.vertex_count(), 0);
  for (EdgeId e = 0; e < m; ++e) {
    if (!realized.contains(e) || pos_left_[e] < 0) continue;
    if (rng.uniform() < gray_coin(instance().x(e))) {
      st.color[e] = EdgeColor::gray;
    } else {
      st.color[e] = EdgeColor::blue;
      ++active_at_right[right_[e]];
    }
  }
  for (EdgeId e = 0; e < m; ++e) {
    if (st.color[e] == EdgeColor::blue && active_at_right[right_[e]] == 1 && rng.uniform() < red_coin(e)) {
      st.color[e] = EdgeColor::red;
    }
  }
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    if (g.side(u) != Side::left) continue;
    const auto& ground = index_.ground[u];
    SubsetMask red = 0, blue = 0, gray = 0;
    for (std::size_t i = 0; i < ground.size(); ++i) {
      const SubsetMask bit = SubsetMask{1} << i;
      switch (st.color[ground[i]]) {
        case EdgeColor::red: red |= bit; break;
        case EdgeColor::blue: blue |= bit; break;
        case EdgeColor::gray: gray |= bit; break;
        case EdgeColor::absent: break;
      }
    }
    int stage = 0;
    const int pick = pick_left(u, red, blue, gray, rng, stage);
    if (pick < 0) continue;
    const EdgeId e = ground[static_cast<std::size_t>(pick)];
    (stage == 1 ? st.r1 : stage == 2 ? st.r2 : st.r3).push_back(e);
  }
  return st;
}

ColoredState RbgScheme::run_colored(const RealizedSet& realized, RngStream& rng) const {
  ColoredState st = run_left(realized, rng);
  const Graph& g = instance().graph();
  std::vector<SubsetMask> arrived(g.vertex_count(), 0);
  for (const auto* set : {&st.r1, &st.r2, &st.r3}) {
    for (EdgeId e : *set) arrived[right_[e]] |= SubsetMask{1} << pos_right_[e];
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    const SubsetMask s = arrived[v];
    if (s == 0) continue;
    auto uniform_pick = [&] {
      const auto k = static_cast<std::size_t>(std::popcount(s));
      SubsetMask rest = s;
      for (std::size_t skip = rng.uniform_index(k); skip > 0; --skip) rest &= rest - 1;
      return std::countr_zero(rest);
    };
    int pick = -1;
    if (options_.step6 == Step6Mode::uniform) {
      pick = uniform_pick();
    } else if (final_[v].knows(s)) {
      pick = final_[v].apply_local(s, rng);
    } else {
      note_unknown();
      // Calibrated rules never select nothing on a non-empty arrival set.
      if (options_.step6 == Step6Mode::calibrated) pick = uniform_pick();
    }
    if (pick >= 0) st.final.push_back(index_.ground[v][static_cast<std::size_t>(pick)]);
  }
  return st;
}

Matching RbgScheme::run_full(const RealizedSet& realized, RngStream& rng) const {
  return run_colored(realized, rng).final;
}

void RbgScheme::build_exact_step6() {
  const Graph& g = instance().graph();
  const std::size_t m = g.edge_count();
  if (m > options_.exact_edge_cap) {
    throw TooLarge("exact step 6 enumerates at most " + std::to_string(options_.exact_edge_cap) +
                   " edges after load completion, instance has " + std::to_string(m));
  }
  const std::size_t n = g.vertex_count();
  exact_ = StageMarginals{};
  for (auto* v : {&exact_.gray, &exact_.red, &exact_.blue, &exact_.r1, &exact_.r2, &exact_.r3, &exact_.matched}) {
    v->assign(m, 0.0);
  }
  std::vector<std::vector<double>> mass(n);
  for (VertexId v = 0; v < n; ++v) {
    if (g.side(v) == Side::right) mass[v].assign(std::size_t{1} << index_.ground[v].size(), 0.0);
  }

  // Per-edge state: 0 absent, 1 gray, 2 active.
  std::vector<std::uint8_t> state(m, 0);
  std::vector<double> pick(m), p1(m), p2(m), p3(m);
  std::vector<std::uint32_t> active_at_right(n, 0);

  auto leaf = [&](double weight) {
    std::fill(active_at_right.begin(), active_at_right.end(), 0);
    for (EdgeId e = 0; e < m; ++e) {
      if (state[e] == 2) ++active_at_right[right_[e]];
    }
    std::fill(p1.begin(), p1.end(), 0.0);
    std::fill(p2.begin(), p2.end(), 0.0);
    std::fill(p3.begin(), p3.end(), 0.0);
    for (VertexId u = 0; u < n; ++u) {
      if (g.side(u) != Side::left) continue;
      const auto& ground = index_.ground[u];
      SubsetMask active = 0, gray = 0, cand = 0;
      std::vector<double> q(ground.size(), 0.0);
      for (std::size_t i = 0; i < ground.size(); ++i) {
        const EdgeId e = ground[i];
        const SubsetMask bit = SubsetMask{1} << i;
        if (state[e] == 1) gray |= bit;
        if (state[e] == 2) {
          active |= bit;
          if (active_at_right[right_[e]] == 1) {
            cand |= bit;
            q[i] = red_coin(e);
            exact_.red[e] += weight * q[i];
          }
          exact_.blue[e] += weight * (1.0 - q[i]);
        }
        if (state[e] == 1) exact_.gray[e] += weight;
      }
      // Marginalize over the red coins of the unique-active candidates.
      for (SubsetMask red = cand;; red = (red - 1) & cand) {
        double w = 1.0;
        for (SubsetMask rest = cand; rest != 0; rest &= rest - 1) {
          const auto i = static_cast<std::size_t>(std::countr_zero(rest));
          w *= (red >> i) & 1 ? q[i] : 1.0 - q[i];
        }
        if (w > 0.0) {
          const SelectionRule* rule = red ? &red_[u] : active ? &blue_[u] : gray ? &gray_[u] : nullptr;
          const SubsetMask s = red ? red : active ? active : gray;
          auto& into = red ? p1 : active ? p2 : p3;
          if (rule) {
            for (SubsetMask rest = s; rest != 0; rest &= rest - 1) {
              const auto i = static_cast<std::size_t>(std::countr_zero(rest));
              into[ground[i]] += w * rule->pick_probability(s, i);
            }
          }
        }
        if (red == 0) break;
      }
    }
    for (EdgeId e = 0; e < m; ++e) {
      pick[e] = p1[e] + p2[e] + p3[e];
      exact_.r1[e] += weight * p1[e];
      exact_.r2[e] += weight * p2[e];
      exact_.r3[e] += weight * p3[e];
    }
    // Left vertices choose independently, so arrivals at v form a product.
    std::vector<double> dist;
    for (VertexId v = 0; v < n; ++v) {
      if (g.side(v) != Side::right) continue;
      const auto& ground = index_.ground[v];
      dist.assign(std::size_t{1} << ground.size(), 0.0);
      dist[0] = weight;
      std::size_t filled = 1;
      for (std::size_t i = 0; i < ground.size(); ++i, filled *= 2) {
        const double a = pick[ground[i]];
        for (std::size_t s = 0; s < filled; ++s) {
          dist[s | filled] = dist[s] * a;
          dist[s] *= 1.0 - a;
        }
      }
      for (std::size_t s = 0; s < dist.size(); ++s) mass[v][s] += dist[s];
    }
  };

  auto recurse = [&](auto&& self, EdgeId e, double weight) -> void {
    if (weight == 0.0) return;
    if (e == m) {
      leaf(weight);
      return;
    }
    const double x = instance().x(e);
    if (!(x > 0.0)) {
      state[e] = 0;
      self(self, e + 1, weight);
      return;
    }
    const double active = -std::expm1(-x);
    const double gray = x + std::expm1(-x);
    state[e] = 0;
    self(self, e + 1, weight * (1.0 - x));
    state[e] = 1;
    self(self, e + 1, weight * gray);
    state[e] = 2;
    self(self, e + 1, weight * active);
    state[e] = 0;
  };
  recurse(recurse, 0, 1.0);

  const double gamma = compute_constants().gamma;
  for (VertexId v = 0; v < n; ++v) {
    if (g.side(v) != Side::right) continue;
    const auto& ground = index_.ground[v];
    std::vector<std::pair<SubsetMask, double>> atoms;
    for (SubsetMask s = 0; s < mass[v].size(); ++s) {
      if (mass[v][s] > 0.0) atoms.emplace_back(s, mass[v][s]);
    }
    arrivals_[v] = atoms;
    const auto dist = SubsetDistribution::explicit_atoms(std::vector<int>(ground.begin(), ground.end()), atoms);
    std::vector<double> beta;
    for (EdgeId e : ground) beta.push_back(gamma * instance().x(e));
    final_[v] = build_rule(dist, beta, options_.degree_cap);
    const auto got = achieved_marginals(final_[v], dist);
    for (std::size_t i = 0; i < ground.size(); ++i) exact_.matched[ground[i]] = got[i];
  }
}

void RbgScheme::build_calibrated_step6() {
  const Graph& g = instance().graph();
  const std::size_t n = g.vertex_count();
  const std::uint64_t samples = options_.calibration_samples;
  if (samples == 0) throw InputError("calibrated step 6 needs at least one calibration sample");
  const unsigned threads = std::max(1u, options_.threads);

  using Counts = std::vector<std::unordered_map<SubsetMask, std::uint64_t>>;
  std::vector<Counts> per_worker(threads, Counts(n));
  for_each_trial(samples, threads, [&](std::uint64_t t, unsigned w) {
    RngStream rng = RngStream(options_.calibration_seed, t).derive(kCalibrationTag);
    const RealizedSet r = sample_r(instance(), rng);
    const ColoredState st = run_left(r, rng);
    std::vector<SubsetMask> arrived(n, 0);
    for (const auto* set : {&st.r1, &st.r2, &st.r3}) {
      for (EdgeId e : *set) arrived[right_[e]] |= SubsetMask{1} << pos_right_[e];
    }
    for (VertexId v = 0; v < n; ++v) {
      if (g.side(v) == Side::right) ++per_worker[w][v][arrived[v]];
    }
  });

  const double gamma = compute_constants().gamma - options_.calibration_slack;
  for (VertexId v = 0; v < n; ++v) {
    if (g.side(v) != Side::right) continue;
    std::map<SubsetMask, std::uint64_t> merged;
    for (const Counts& c : per_worker) {
      for (const auto& [mask, count] : c[v]) merged[mask] += count;
    }
    std::vector<std::pair<SubsetMask, double>> atoms;
    for (const auto& [mask, count] : merged) {
      atoms.emplace_back(mask, static_cast<double>(count) / static_cast<double>(samples));
    }
    arrivals_[v] = atoms;
    const auto& ground = index_.ground[v];
    const auto dist = SubsetDistribution::explicit_atoms(std::vector<int>(ground.begin(), ground.end()), atoms);
    std::vector<double> beta;
    for (EdgeId e : ground) beta.push_back(gamma * instance().x(e));
    try {
      final_[v] = fill_remainder(build_rule(dist, beta, options_.degree_cap));
    } catch (const Infeasible& err) {
      throw CalibrationInsufficient("calibrated step 6 at right vertex " + std::to_string(v) + " with " +
                                    std::to_string(samples) + " samples: " + err.what());
    }
  }
}

// ---------------------------------------------------------------- Karp-Sipser

KarpSipserScheme::KarpSipserScheme(const FractionalMatching& fm) : Scheme(trivial_completion(fm)) {}

Matching KarpSipserScheme::run_full(const RealizedSet& realized, RngStream& rng) const {
  KsWorkspace ws;
  return ks_first_stage(instance().graph().view(), realized.flags(), rng, ws);
}

std::unique_ptr<Scheme> make_scheme(const std::string& name, const FractionalMatching& fm,
                                    const SchemeOptions& options) {
  if (name == "simple") return std::make_unique<SimpleScheme>(fm, options);
  if (name == "two-stage") return std::make_unique<TwoStageScheme>(fm, options);
  if (name == "rbg") return std::make_unique<RbgScheme>(fm, options);
  if (name == "karp-sipser" || name == "ks") return std::make_unique<KarpSipserScheme>(fm);
  throw InputError("unknown scheme '" + name + "' (expected simple, two-stage, rbg or karp-sipser)");
}

}  // namespace crs
