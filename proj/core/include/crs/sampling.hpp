#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

#include "crs/graph.hpp"
#include "crs/rng.hpp"

namespace crs {

/// A sampled edge subset R(x) of one instance.
class RealizedSet {
 public:
  RealizedSet() = default;
  explicit RealizedSet(std::size_t edge_count) : present_(edge_count, 0) {}

  std::size_t edge_count() const noexcept { return present_.size(); }
  bool contains(EdgeId e) const { return present_[e] != 0; }
  void insert(EdgeId e) { present_[e] = 1; }
  void erase(EdgeId e) { present_[e] = 0; }
  std::size_t size() const { return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), 1)); }
  std::vector<EdgeId> ids() const;

  /// Byte-per-edge presence flags, indexable by edge id.
  const std::vector<std::uint8_t>& flags() const noexcept { return present_; }

  friend bool operator==(const RealizedSet&, const RealizedSet&) = default;

 private:
  std::vector<std::uint8_t> present_;
};

/// Each edge present independently with probability x_e. Consumes exactly one
/// uniform per edge, in edge-id order.
RealizedSet sample_r(const FractionalMatching& fm, RngStream& rng);

/// R(x) conditioned on `planted` being present. Consumes the same uniforms as
/// `sample_r`, so with x_planted = 1 the two agree draw for draw.
/// Throws EdgeNeverAppears when x_planted = 0.
RealizedSet sample_r_planted(const FractionalMatching& fm, EdgeId planted, RngStream& rng);

/// Runs fn(trial, worker) for trial in [0, count) on `threads` workers with a
/// static block partition. fn must only touch per-trial or per-worker state.
template <class Fn>
void for_each_trial(std::uint64_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 2) {
    for (std::uint64_t t = 0; t < count; ++t) fn(t, 0u);
    return;
  }
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    const std::uint64_t begin = count * w / threads;
    const std::uint64_t end = count * (w + 1) / threads;
    pool.emplace_back([&fn, begin, end, w] {
      for (std::uint64_t t = begin; t < end; ++t) fn(t, w);
    });
  }
}

struct Interval {
  double low;
  double high;
};

/// 99% two-sided normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Wilson score interval for `successes` out of `trials` (trials > 0).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ99);

}  // namespace crs
