#include "crs/sampling.hpp"

#include <cmath>

#include "crs/error.hpp"

namespace crs {

std::vector<EdgeId> RealizedSet::ids() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < present_.size(); ++e) {
    if (present_[e]) out.push_back(e);
  }
  return out;
}

RealizedSet sample_r(const FractionalMatching& fm, RngStream& rng) {
  const auto x = fm.x();
  RealizedSet out(x.size());
  for (EdgeId e = 0; e < x.size(); ++e) {
    if (rng.uniform() < x[e]) out.insert(e);
  }
  return out;
}

RealizedSet sample_r_planted(const FractionalMatching& fm, EdgeId planted, RngStream& rng) {
  const auto x = fm.x();
  if (planted >= x.size()) throw InputError("planted edge " + std::to_string(planted) + " does not exist");
  if (!(x[planted] > 0.0)) throw EdgeNeverAppears(planted);
  RealizedSet out = sample_r(fm, rng);
  out.insert(planted);
  return out;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, std::min(centre - half, p)), std::min(1.0, std::max(centre + half, p))};
}

}  // namespace crs
