#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/rng.hpp"
#include "chessmix/sample.hpp"

namespace chessmix {

/// Procedural labeled samples: each side x side image is split into
/// block x block squares whose classes follow `shares` exactly (rounded per
/// image) in a seeded random arrangement. Pixels get a class color plus noise.
inline std::vector<LabeledSample> make_toy_dataset(int count, int side, int block, const std::vector<double>& shares,
                                                   std::uint64_t seed) {
  if (count < 1 || block < 1 || side % block != 0) throw ConfigError("toy dataset: side must be a multiple of block");
  if (shares.empty() || shares.size() > 255) throw ConfigError("toy dataset: 1..255 classes");
  const int per_axis = side / block;
  const int blocks = per_axis * per_axis;

  std::vector<std::uint8_t> classes;
  for (std::size_t c = 0; c < shares.size(); ++c) {
    const int n = static_cast<int>(std::lround(shares[c] * blocks));
    classes.insert(classes.end(), n, static_cast<std::uint8_t>(c));
  }
  classes.resize(blocks, 0);

  std::vector<LabeledSample> out;
  for (int s = 0; s < count; ++s) {
    RngStream rng(seed, static_cast<std::uint64_t>(s));
    auto order = classes;
    for (int i = blocks - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(order[i], order[j]);
    }
    LabeledSample sample{"toy_" + std::to_string(s), make_image(side, side), make_mask(side, side)};
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        const auto cls = order[(y / block) * per_axis + (x / block)];
        sample.mask.at(x, y) = cls;
        const int base[3] = {40 + 70 * (cls % 3), 40 + 50 * ((cls / 3) % 4), 200 - 60 * (cls % 3)};
        for (int c = 0; c < 3; ++c) {
          const int noise = static_cast<int>(rng.uniform() * 31.0) - 15;
          sample.image.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(base[c] + noise, 0, 255));
        }
      }
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace chessmix
