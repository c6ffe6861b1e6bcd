#pragma once

// Contention resolution schemes for bipartite matchings.
//
// Every scheme owns the load-completed instance it runs on. Realized sets are
// sampled over that completed instance (original edge ids are unchanged, dummy
// edges come after them); `run` strips dummy edges from the result.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "crs/graph.hpp"
#include "crs/karp_sipser.hpp"
#include "crs/rng.hpp"
#include "crs/sampling.hpp"
#include "crs/select_one.hpp"

namespace crs {

struct SchemeConstants {
  double beta = 0.0;              // (e^{-1/e} - e^{-1}) / (1 - e^{-1})
  double gamma = 0.0;             // (1 - e^{-1/e}) - e^{-1}(4 beta - 2 beta^2) + (2 beta - beta^2)
  double simple_factor = 0.0;     // 2(1 - e^{-1/e}) - e^{-2}
  double two_stage_factor = 0.0;  // 1 - e^{-(1 - 1/e)}
};

SchemeConstants compute_constants();

enum class Step6Mode { exact, calibrated, uniform };

std::string to_string(Step6Mode mode);
Step6Mode parse_step6_mode(const std::string& name);

struct SchemeOptions {
  std::size_t degree_cap = kDefaultDegreeCap;
  Step6Mode step6 = Step6Mode::exact;
  std::size_t exact_edge_cap = 12;  // completed edges allowed in exact step 6
  std::uint64_t calibration_samples = 100'000;
  double calibration_slack = 0.01;
  std::uint64_t calibration_seed = 0;
  unsigned threads = 1;
};

class Scheme {
 public:
  virtual ~Scheme() = default;

  virtual std::string name() const = 0;

  const LoadCompletion& completion() const noexcept { return completion_; }
  const FractionalMatching& instance() const noexcept { return completion_.instance; }

  /// Matching over completed edge ids, dummy edges included.
  virtual Matching run_full(const RealizedSet& realized, RngStream& rng) const = 0;

  /// Matching over original edge ids.
  Matching run(const RealizedSet& realized, RngStream& rng) const;

  /// Realized subsets that a selection rule had no row for (calibrated step 6
  /// only); the vertex then picks uniformly among its arrivals.
  std::uint64_t unknown_subsets() const noexcept { return unknown_.load(std::memory_order_relaxed); }

 protected:
  explicit Scheme(LoadCompletion completion) : completion_(std::move(completion)) {}

  void note_unknown() const { unknown_.fetch_add(1, std::memory_order_relaxed); }

  LoadCompletion completion_;

 private:
  mutable std::atomic<std::uint64_t> unknown_{0};
};

/// Local ground sets: for every vertex, its incident edges with x > 0 in
/// incidence order, and each edge's position in its endpoints' ground sets.
struct LocalIndex {
  std::vector<std::vector<EdgeId>> ground;
  std::vector<std::int32_t> pos_u;  // position at edge.u, -1 when x = 0
  std::vector<std::int32_t> pos_v;

  explicit LocalIndex(const FractionalMatching& fm);
};

/// Activation, availability at the far endpoint, and one selection per vertex.
/// Each vertex picks one of its available edges whenever it has any; the
/// flow rule fixes the proportions.
class SimpleScheme final : public Scheme {
 public:
  /// Requires a triangle-free instance; throws InputError otherwise.
  explicit SimpleScheme(const FractionalMatching& fm, const SchemeOptions& options = {});

  std::string name() const override { return "simple"; }
  Matching run_full(const RealizedSet& realized, RngStream& rng) const override;

  /// Pr[active | present] = (1 - e^{-x}) / x.
  static double activation(double x);
  /// Selection target at each endpoint.
  static double target(double x);

  const LocalIndex& index() const noexcept { return index_; }
  const SelectionRule& rule(VertexId v) const { return rules_.at(v); }
  /// Pr[e available at its endpoint `at`] = (1 - e^{-x_e}) e^{-(load(other) - x_e)}.
  double availability(EdgeId e, VertexId at) const;

 private:
  LocalIndex index_;
  std::vector<SelectionRule> rules_;
};

/// Selection at each left vertex among realized edges, then at each right
/// vertex among first-stage survivors.
class TwoStageScheme final : public Scheme {
 public:
  explicit TwoStageScheme(const FractionalMatching& fm, const SchemeOptions& options = {});

  std::string name() const override { return "two-stage"; }
  Matching run_full(const RealizedSet& realized, RngStream& rng) const override;

  const LocalIndex& index() const noexcept { return index_; }
  const SelectionRule& rule(VertexId v) const { return rules_.at(v); }
  /// Exact first-stage survival probability of each edge.
  const std::vector<double>& stage1_marginals() const noexcept { return stage1_; }

 private:
  LocalIndex index_;
  std::vector<SelectionRule> rules_;  // left: first stage, right: second stage
  std::vector<double> stage1_;
};

enum class EdgeColor : std::uint8_t { absent, gray, red, blue };

/// Per-edge pipeline state of one red/blue/gray run over completed edge ids.
struct ColoredState {
  std::vector<EdgeColor> color;
  std::vector<EdgeId> r1;  // red survivors of step 3
  std::vector<EdgeId> r2;  // blue survivors of step 4
  std::vector<EdgeId> r3;  // gray survivors of step 5
  Matching final;          // step 6, dummy edges included
};

/// Exact per-edge stage probabilities (exact step-6 mode only).
struct StageMarginals {
  std::vector<double> gray, red, blue, r1, r2, r3, matched;
};

class RbgScheme final : public Scheme {
 public:
  /// Requires a bipartition. Builds every left-side rule and the step-6 rules
  /// for `options.step6`; exact mode throws TooLarge above options.exact_edge_cap
  /// completed edges, calibrated mode throws CalibrationInsufficient when the
  /// empirical cut condition fails. Calibrated rules hand their "select nothing"
  /// remainder to the arrivals, so a right vertex with arrivals always picks one.
  /// Infeasible from any stage propagates.
  explicit RbgScheme(const FractionalMatching& fm, const SchemeOptions& options = {});

  std::string name() const override { return "rbg"; }
  Step6Mode step6_mode() const noexcept { return options_.step6; }
  Matching run_full(const RealizedSet& realized, RngStream& rng) const override;

  ColoredState run_colored(const RealizedSet& realized, RngStream& rng) const;

  /// Steps 1-5 only: colors and left-side survivors, no step 6.
  ColoredState run_left(const RealizedSet& realized, RngStream& rng) const;

  /// Conditional coin probabilities.
  static double gray_coin(double x);                      // (x - 1 + e^{-x}) / x
  double red_coin(EdgeId e) const;                        // (1 - e^{-x/e}) / ((e^x - 1) e^{-load(v)})

  const LocalIndex& index() const noexcept { return index_; }
  bool is_left(VertexId v) const { return instance().graph().side(v) == Side::left; }
  VertexId left_of(EdgeId e) const { return left_[e]; }
  VertexId right_of(EdgeId e) const { return right_[e]; }
  std::int32_t pos_left(EdgeId e) const { return pos_left_[e]; }
  std::int32_t pos_right(EdgeId e) const { return pos_right_[e]; }

  const SelectionRule& red_rule(VertexId u) const { return red_.at(u); }
  const SelectionRule& blue_rule(VertexId u) const { return blue_.at(u); }
  const SelectionRule& gray_rule(VertexId u) const { return gray_.at(u); }
  const SelectionRule& final_rule(VertexId v) const { return final_.at(v); }

  /// Arrival distribution used to build the step-6 rule at right vertex v
  /// (exact or empirical); empty for uniform mode.
  const std::vector<std::pair<SubsetMask, double>>& arrivals(VertexId v) const { return arrivals_.at(v); }

  /// Filled in exact mode.
  const StageMarginals& exact_marginals() const noexcept { return exact_; }

  /// Blue rules whose monotonization hit the transfer cap.
  std::size_t unconverged_blue_rules() const noexcept { return unconverged_blue_; }

 private:
  void build_left_rules();
  void build_exact_step6();
  void build_calibrated_step6();
  int pick_left(VertexId u, SubsetMask red, SubsetMask blue, SubsetMask gray, RngStream& rng,
                int& stage) const;

  SchemeOptions options_;
  LocalIndex index_;
  std::vector<VertexId> left_, right_;
  std::vector<std::int32_t> pos_left_, pos_right_;
  std::vector<SelectionRule> red_, blue_, gray_, final_;
  std::vector<std::vector<std::pair<SubsetMask, double>>> arrivals_;
  StageMarginals exact_;
  std::size_t unconverged_blue_ = 0;
};

/// Karp-Sipser first stage on the realized set (no load completion).
class KarpSipserScheme final : public Scheme {
 public:
  explicit KarpSipserScheme(const FractionalMatching& fm);

  std::string name() const override { return "karp-sipser"; }
  Matching run_full(const RealizedSet& realized, RngStream& rng) const override;
};

/// Names: simple, two-stage, rbg, karp-sipser.
std::unique_ptr<Scheme> make_scheme(const std::string& name, const FractionalMatching& fm,
                                    const SchemeOptions& options = {});

}  // namespace crs
