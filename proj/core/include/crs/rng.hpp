#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace crs {

/// splitmix64 finalizer; used to turn (seed, stream) pairs into engine seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// A reproducible random stream identified by (master_seed, stream_id).
///
/// The stream's output depends only on that pair, never on which thread
/// consumes it or in what order other streams are consumed. Trial `i` of an
/// experiment uses `RngStream(seed, i)`; named sub-streams are obtained with
/// `derive(tag)`.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed),
        stream_id_(stream_id),
        engine_(mix64(master_seed ^ mix64(stream_id ^ 0x5bd1e9955bd1e995ULL))) {}

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Fresh stream keyed by `tag`, independent of how much of this one was consumed.
  RngStream derive(std::uint64_t tag) const {
    return RngStream(master_seed_, mix64(stream_id_ * 0x9e3779b97f4a7c15ULL + mix64(tag)));
  }

  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace crs
