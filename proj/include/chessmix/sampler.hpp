#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/rng.hpp"
#include "chessmix/stats_index.hpp"

namespace chessmix {

struct SamplingConfig {
  std::vector<double> scale_probabilities{0.5, 0.5};
  bool mirror_patches = false;

  void validate() const {
    if (scale_probabilities.empty()) throw ConfigError("scale probabilities are empty");
    double sum = 0.0;
    for (double p : scale_probabilities) {
      if (!(p >= 0.0)) throw ConfigError("scale probabilities must be nonnegative");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("scale probabilities must sum to 1");
  }
};

/// Returns the ordinal i with probability scale_probabilities[i].
template <UniformSource Rng>
std::size_t choose_scale(Rng& rng, const SamplingConfig& config) {
  const double u = rng.uniform();
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < config.scale_probabilities.size(); ++i) {
    const double p = config.scale_probabilities[i];
    if (p <= 0.0) continue;
    last_positive = i;
    running += p;
    if (u < running) return i;
  }
  // u landed in the rounding slack above the final cumulative value
  return last_positive;
}

/// Descriptor whose cumulative interval contains `target`, a value in
/// [0, total). Zero-weight descriptors have empty intervals and are never hit.
inline std::size_t locate_patch(const ScaleIndex& level, double target) {
  if (level.patches.empty() || !(level.total() > 0.0))
    throw GenerationError("scale " + std::to_string(level.scale) + " has no positive-weight patches");
  const auto& cum = level.cumulative;
  auto it = std::upper_bound(cum.begin(), cum.end(), target);
  if (it == cum.end()) {
    // target == total after rounding; fall back to the last positive entry
    it = std::lower_bound(cum.begin(), cum.end(), level.total());
  }
  return static_cast<std::size_t>(it - cum.begin());
}

/// Weighted draw with replacement: probability weight / total.
template <UniformSource Rng>
const PatchDescriptor& choose_patch(Rng& rng, const ScaleIndex& level) {
  const double target = rng.uniform() * level.total();
  return level.patches[locate_patch(level, target)];
}

template <UniformSource Rng>
const PatchDescriptor& choose_patch(Rng& rng, const PatchIndex& index, int scale) {
  return choose_patch(rng, index.level(scale));
}

}  // namespace chessmix
