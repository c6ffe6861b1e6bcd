#include "crs/select_one.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "crs/error.hpp"
#include "max_flow.hpp"

namespace crs {
namespace {

constexpr double kFeasibilityTolerance = kMarginalTolerance;

void check_ground(std::span<const int> ground) {
  if (ground.size() > 31) throw DegreeCapExceeded("ground set larger than 31 elements", -1, ground.size(), 31);
}

}  // namespace

SubsetDistribution SubsetDistribution::product(std::vector<int> ground, std::vector<double> probs) {
  check_ground(ground);
  if (probs.size() != ground.size()) throw InputError("product distribution: one probability per element");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("product distribution: probability outside [0,1]");
  }
  SubsetDistribution d;
  d.ground_ = std::move(ground);
  d.product_ = true;
  d.probs_ = std::move(probs);
  return d;
}

SubsetDistribution SubsetDistribution::explicit_atoms(std::vector<int> ground,
                                                      std::vector<std::pair<SubsetMask, double>> atoms) {
  check_ground(ground);
  const SubsetMask full = ground.size() == 32 ? ~SubsetMask{0} : (SubsetMask{1} << ground.size()) - 1;
  std::map<SubsetMask, double> merged;
  double total = 0.0;
  for (const auto& [mask, p] : atoms) {
    if (!(p >= 0.0)) throw InputError("explicit distribution: negative or NaN mass");
    if ((mask & ~full) != 0) throw InputError("explicit distribution: atom outside the ground set");
    total += p;
    if (p > 0.0) merged[mask] += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InputError("explicit distribution: masses sum to " + std::to_string(total));
  }
  SubsetDistribution d;
  d.ground_ = std::move(ground);
  d.atoms_.assign(merged.begin(), merged.end());
  return d;
}

std::vector<std::pair<SubsetMask, double>> SubsetDistribution::atoms() const {
  if (!product_) return atoms_;
  const std::size_t k = ground_.size();
  std::vector<double> mass(std::size_t{1} << k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    const SubsetMask bit = SubsetMask{1} << i;
    for (SubsetMask m = 0; m < mass.size(); ++m) mass[m] *= (m & bit) ? probs_[i] : 1.0 - probs_[i];
  }
  std::vector<std::pair<SubsetMask, double>> out;
  out.reserve(mass.size());
  for (SubsetMask m = 0; m < mass.size(); ++m) {
    if (mass[m] > 0.0) out.emplace_back(m, mass[m]);
  }
  return out;
}

double SubsetDistribution::hit_probability(SubsetMask s) const {
  if (product_) {
    double miss = 1.0;
    for (std::size_t i = 0; i < ground_.size(); ++i) {
      if (s & (SubsetMask{1} << i)) miss *= 1.0 - probs_[i];
    }
    return 1.0 - miss;
  }
  double hit = 0.0;
  for (const auto& [mask, p] : atoms_) {
    if (mask & s) hit += p;
  }
  return hit;
}

SelectionRule::SelectionRule(std::vector<int> ground,
                             std::vector<std::pair<SubsetMask, std::vector<double>>> rows)
    : ground_(std::move(ground)) {
  check_ground(ground_);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  row_index_.assign(std::size_t{1} << ground_.size(), -1);
  offsets_.push_back(0);
  for (auto& [mask, probs] : rows) {
    if (mask >= row_index_.size()) throw InputError("selection rule row outside the ground set");
    if (probs.size() != static_cast<std::size_t>(std::popcount(mask))) {
      throw InputError("selection rule row needs one probability per member");
    }
    if (row_index_[mask] >= 0) throw InputError("selection rule has a duplicate row");
    row_index_[mask] = static_cast<std::int32_t>(masks_.size());
    masks_.push_back(mask);
    probs_.insert(probs_.end(), probs.begin(), probs.end());
    offsets_.push_back(static_cast<std::uint32_t>(probs_.size()));
  }
}

bool SelectionRule::knows(SubsetMask s) const { return s < row_index_.size() && row_index_[s] >= 0; }

std::size_t SelectionRule::row_of(SubsetMask s) const { return static_cast<std::size_t>(row_index_[s]); }

double SelectionRule::pick_probability(SubsetMask s, std::size_t i) const {
  const SubsetMask bit = SubsetMask{1} << i;
  if (!knows(s) || !(s & bit)) return 0.0;
  const auto slot = static_cast<std::size_t>(std::popcount(s & (bit - 1)));
  return probs_[offsets_[row_of(s)] + slot];
}

int SelectionRule::apply_local(SubsetMask s, RngStream& rng) const {
  if (s == 0 || !knows(s)) return -1;
  const std::size_t row = row_of(s);
  double u = rng.uniform();
  std::size_t slot = offsets_[row];
  for (SubsetMask rest = s; rest != 0; rest &= rest - 1, ++slot) {
    u -= probs_[slot];
    if (u < 0.0) return std::countr_zero(rest);
  }
  return -1;
}

void SelectionRule::set_row(SubsetMask s, std::span<const double> probs) {
  if (!knows(s) || probs.size() != static_cast<std::size_t>(std::popcount(s))) {
    throw InputError("set_row: unknown subset or wrong row length");
  }
  std::copy(probs.begin(), probs.end(), probs_.begin() + offsets_[row_of(s)]);
}

std::pair<double, SubsetMask> min_cut_slack(const SubsetDistribution& dist, std::span<const double> beta) {
  const std::size_t k = dist.size();
  const std::size_t n = std::size_t{1} << k;
  std::vector<double> inside(n, 0.0);  // Pr[R subset of T]
  double total = 0.0;
  for (const auto& [mask, p] : dist.atoms()) {
    inside[mask] += p;
    total += p;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const SubsetMask bit = SubsetMask{1} << i;
    for (SubsetMask m = 0; m < n; ++m) {
      if (m & bit) inside[m] += inside[m ^ bit];
    }
  }
  std::vector<double> target(n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  SubsetMask arg = 0;
  const SubsetMask full = static_cast<SubsetMask>(n - 1);
  for (SubsetMask s = 1; s < n; ++s) {
    const int low = std::countr_zero(s);
    target[s] = target[s & (s - 1)] + beta[static_cast<std::size_t>(low)];
    const double slack = (total - inside[full & ~s]) - target[s];
    if (slack < best) {
      best = slack;
      arg = s;
    }
  }
  if (n == 1) best = 0.0;
  return {best, arg};
}

SelectionRule build_rule(const SubsetDistribution& dist, std::span<const double> beta,
                         std::size_t degree_cap) {
  const std::size_t k = dist.size();
  if (k > degree_cap) {
    throw DegreeCapExceeded("ground set of size " + std::to_string(k) + " exceeds degree cap " +
                                std::to_string(degree_cap),
                            -1, k, degree_cap);
  }
  if (beta.size() != k) throw InputError("build_rule: one target per ground element");
  for (double b : beta) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("build_rule: targets must be finite and non-negative");
  }

  const auto atoms = dist.atoms();
  const std::size_t m = atoms.size();
  const std::size_t source = 0;
  const std::size_t sink = m + k + 1;
  detail::MaxFlow net(m + k + 2);
  std::vector<std::size_t> first_arc(m);
  for (std::size_t a = 0; a < m; ++a) {
    net.add_arc(source, 1 + a, atoms[a].second);
    first_arc[a] = std::numeric_limits<std::size_t>::max();
    for (SubsetMask rest = atoms[a].first; rest != 0; rest &= rest - 1) {
      const auto i = static_cast<std::size_t>(std::countr_zero(rest));
      const std::size_t arc = net.add_arc(1 + a, 1 + m + i, std::numeric_limits<double>::infinity());
      if (first_arc[a] == std::numeric_limits<std::size_t>::max()) first_arc[a] = arc;
    }
  }
  for (std::size_t i = 0; i < k; ++i) net.add_arc(1 + m + i, sink, beta[i]);

  const double value = net.solve(source, sink);
  const double wanted = std::accumulate(beta.begin(), beta.end(), 0.0);
  if (value < wanted - kFeasibilityTolerance) {
    const auto reach = net.source_side(source);
    SubsetMask witness = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!reach[1 + m + i]) witness |= SubsetMask{1} << i;
    }
    auto target_of = [&](SubsetMask s) {
      double t = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        if (s & (SubsetMask{1} << i)) t += beta[i];
      }
      return t;
    };
    if (witness == 0 || dist.hit_probability(witness) >= target_of(witness)) {
      witness = min_cut_slack(dist, beta).second;
    }
    std::vector<int> ids;
    for (std::size_t i = 0; i < k; ++i) {
      if (witness & (SubsetMask{1} << i)) ids.push_back(dist.ground()[i]);
    }
    const double hit = dist.hit_probability(witness);
    const double target = target_of(witness);
    throw Infeasible("no selection rule meets the targets: Pr[S meets R] = " + std::to_string(hit) +
                         " < " + std::to_string(target) + " for a witness set of size " +
                         std::to_string(ids.size()),
                     std::move(ids), hit, target);
  }

  std::vector<std::pair<SubsetMask, std::vector<double>>> rows;
  rows.reserve(m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto [mask, p] = atoms[a];
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(std::popcount(mask)));
    std::size_t arc = first_arc[a];
    double sum = 0.0;
    for (SubsetMask rest = mask; rest != 0; rest &= rest - 1, arc += 2) {
      const double pi = std::clamp(net.flow(arc) / p, 0.0, 1.0);
      probs.push_back(pi);
      sum += pi;
    }
    if (sum > 1.0) {
      for (double& pi : probs) pi /= sum;
    }
    rows.emplace_back(mask, std::move(probs));
  }
  return SelectionRule(std::vector<int>(dist.ground().begin(), dist.ground().end()), std::move(rows));
}

std::optional<int> apply_rule(const SelectionRule& rule, SubsetMask realized, RngStream& rng) {
  const int local = rule.apply_local(realized, rng);
  if (local < 0) return std::nullopt;
  return rule.ground()[static_cast<std::size_t>(local)];
}

std::vector<double> achieved_marginals(const SelectionRule& rule, const SubsetDistribution& dist) {
  std::vector<double> out(dist.size(), 0.0);
  for (const auto& [mask, p] : dist.atoms()) {
    for (SubsetMask rest = mask; rest != 0; rest &= rest - 1) {
      const auto i = static_cast<std::size_t>(std::countr_zero(rest));
      out[i] += p * rule.pick_probability(mask, i);
    }
  }
  return out;
}

namespace {

// Dense working copy of a rule: pi[s * k + i], plus subset masses.
struct DenseRule {
  std::size_t k;
  std::vector<double> pi;
  std::vector<double> mass;
  std::vector<std::uint8_t> known;

  DenseRule(const SelectionRule& rule, const SubsetDistribution& dist)
      : k(rule.size()),
        pi((std::size_t{1} << k) * k, 0.0),
        mass(std::size_t{1} << k, 0.0),
        known(std::size_t{1} << k, 0) {
    for (const auto& [mask, p] : dist.atoms()) {
      if (!rule.knows(mask)) continue;
      mass[mask] = p;
      known[mask] = 1;
      for (std::size_t i = 0; i < k; ++i) pi[mask * k + i] = rule.pick_probability(mask, i);
    }
  }

  double& at(SubsetMask s, std::size_t i) { return pi[s * k + i]; }

  double total(SubsetMask s) const {
    double t = 0.0;
    for (std::size_t i = 0; i < k; ++i) t += pi[s * k + i];
    return t;
  }

  double potential() const {
    double phi = 0.0;
    for (SubsetMask s2 = 0; s2 < mass.size(); ++s2) {
      if (!known[s2]) continue;
      for (SubsetMask rest = s2; rest != 0; rest &= rest - 1) {
        const SubsetMask s1 = s2 & ~(rest & (~rest + 1));
        if (!known[s1]) continue;
        for (SubsetMask in1 = s1; in1 != 0; in1 &= in1 - 1) {
          const auto i = static_cast<std::size_t>(std::countr_zero(in1));
          phi += mass[s1] * mass[s2] * std::max(0.0, pi[s2 * k + i] - pi[s1 * k + i]);
        }
      }
    }
    return phi;
  }
};

}  // namespace

double adjacent_potential(const SelectionRule& rule, const SubsetDistribution& dist) {
  return DenseRule(rule, dist).potential();
}

MonotonizeResult monotonize(const SelectionRule& rule, const SubsetDistribution& dist,
                            std::size_t transfer_cap, double tol) {
  if (rule.size() != dist.size()) throw InputError("monotonize: rule and distribution disagree on the ground set");
  DenseRule d(rule, dist);
  MonotonizeResult result;
  result.potential_before = d.potential();

  const std::size_t k = d.k;
  const auto n = static_cast<SubsetMask>(d.mass.size());
  // Sweep supersets in increasing size so fixes propagate upward through the lattice.
  std::vector<SubsetMask> order;
  for (SubsetMask s = 0; s < n; ++s) {
    if (d.known[s] && std::popcount(s) >= 2) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](SubsetMask a, SubsetMask b) { return std::popcount(a) < std::popcount(b); });

  bool changed = true;
  bool capped = false;
  while (changed && !capped) {
    changed = false;
    for (SubsetMask s2 : order) {
      const double p2 = d.mass[s2];
      for (SubsetMask rest = s2; rest != 0 && !capped; rest &= rest - 1) {
        const SubsetMask s1 = s2 & ~(rest & (~rest + 1));
        if (!d.known[s1]) continue;
        const double p1 = d.mass[s1];
        const double scale = 1.0 / p1 + 1.0 / p2;
        for (SubsetMask in1 = s1; in1 != 0 && !capped; in1 &= in1 - 1) {
          const auto i = static_cast<std::size_t>(std::countr_zero(in1));
          double gap = d.at(s2, i) - d.at(s1, i);
          while (gap > tol) {
            const double slack = 1.0 - d.total(s1);
            double tau = 0.0;
            std::size_t partner = k;
            if (slack > tol) {
              tau = std::min(p1 * slack, gap / scale);
            } else {
              double best = tol;
              for (SubsetMask in = s1; in != 0; in &= in - 1) {
                const auto j = static_cast<std::size_t>(std::countr_zero(in));
                const double excess = d.at(s1, j) - d.at(s2, j);
                if (j != i && excess > best) {
                  best = excess;
                  partner = j;
                }
              }
              if (partner == k) break;
              tau = std::min(gap, best) / scale;
            }
            d.at(s1, i) += tau / p1;
            d.at(s2, i) -= tau / p2;
            if (partner != k) {
              d.at(s1, partner) -= tau / p1;
              d.at(s2, partner) += tau / p2;
            }
            changed = true;
            if (++result.transfers >= transfer_cap) {
              capped = true;
              break;
            }
            gap = d.at(s2, i) - d.at(s1, i);
          }
        }
      }
      if (capped) break;
    }
  }

  std::vector<std::pair<SubsetMask, std::vector<double>>> rows;
  for (SubsetMask s : rule.masks()) {
    std::vector<double> probs;
    for (SubsetMask rest = s; rest != 0; rest &= rest - 1) {
      probs.push_back(std::clamp(d.at(s, static_cast<std::size_t>(std::countr_zero(rest))), 0.0, 1.0));
    }
    rows.emplace_back(s, std::move(probs));
  }
  result.rule = SelectionRule(std::vector<int>(rule.ground().begin(), rule.ground().end()), std::move(rows));
  result.potential_after = d.potential();
  result.converged = !capped;
  return result;
}

void to_json(nlohmann::json& j, const SelectionRule& rule) {
  j = nlohmann::json::object();
  j["ground"] = std::vector<int>(rule.ground().begin(), rule.ground().end());
  auto rows = nlohmann::json::array();
  for (SubsetMask s : rule.masks()) {
    std::vector<double> pick;
    for (SubsetMask rest = s; rest != 0; rest &= rest - 1) {
      pick.push_back(rule.pick_probability(s, static_cast<std::size_t>(std::countr_zero(rest))));
    }
    rows.push_back({{"mask", s}, {"pick", pick}});
  }
  j["rows"] = std::move(rows);
}

}  // namespace crs
