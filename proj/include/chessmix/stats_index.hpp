#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/exact_sum.hpp"
#include "chessmix/positions.hpp"
#include "chessmix/sample.hpp"

namespace chessmix {

/// Training-set class statistics. Ignore-index pixels are excluded from both
/// counts and the denominator.
struct ClassStats {
  int class_count = 0;
  std::uint8_t ignore_index = kDefaultIgnoreIndex;
  std::vector<std::uint64_t> counts;
  std::vector<double> percentages;
  double c_max = 0.0;
  std::uint64_t total = 0;

  bool present(int cls) const { return cls >= 0 && cls < class_count && percentages[cls] > 0.0; }

  /// Per-pixel rarity factor c_max / c_i; 0 for absent classes.
  double factor(int cls) const { return present(cls) ? c_max / percentages[cls] : 0.0; }

  std::vector<int> absent_classes() const {
    std::vector<int> out;
    for (int i = 0; i < class_count; ++i)
      if (!present(i)) out.push_back(i);
    return out;
  }

  /// Builds stats straight from a percentage vector (no pixel counts).
  static ClassStats from_percentages(std::vector<double> pct, std::uint8_t ignore = kDefaultIgnoreIndex) {
    ClassStats s;
    s.class_count = static_cast<int>(pct.size());
    s.ignore_index = ignore;
    s.counts.assign(pct.size(), 0);
    s.c_max = pct.empty() ? 0.0 : *std::max_element(pct.begin(), pct.end());
    s.percentages = std::move(pct);
    if (!(s.c_max > 0.0)) throw DatasetError("class percentages must contain a positive entry");
    return s;
  }
};

inline ClassStats compute_class_stats(const std::vector<LabeledSample>& samples, int class_count,
                                      std::uint8_t ignore_index = kDefaultIgnoreIndex) {
  if (class_count <= 0 || class_count > 256) throw DatasetError("class count must be in [1, 256]");
  ClassStats s;
  s.class_count = class_count;
  s.ignore_index = ignore_index;
  s.counts.assign(class_count, 0);
  for (const auto& sample : samples)
    for (auto v : sample.mask.data())
      if (v != ignore_index && v < class_count) ++s.counts[v];
  for (auto c : s.counts) s.total += c;
  if (s.total == 0) throw DatasetError("dataset has no labeled pixels (entirely ignore index)");
  s.percentages.resize(class_count);
  for (int i = 0; i < class_count; ++i)
    s.percentages[i] = static_cast<double>(s.counts[i]) / static_cast<double>(s.total);
  s.c_max = *std::max_element(s.percentages.begin(), s.percentages.end());
  return s;
}

struct PatchOffset {
  int x = 0;
  int y = 0;
  friend bool operator==(const PatchOffset&, const PatchOffset&) = default;
};

/// Half-overlap sweep of side x side windows, row-major, edge-flush at the
/// right and bottom borders.
inline std::vector<PatchOffset> enumerate_patches(int width, int height, int side) {
  if (side <= 0 || side % 2 != 0) throw DatasetError("mini-patch side must be positive and even");
  if (side > width || side > height)
    throw DatasetError("mini-patch side " + std::to_string(side) + " exceeds image " + std::to_string(width) +
                       "x" + std::to_string(height));
  const auto xs = sliding_offsets(width, side, side / 2);
  const auto ys = sliding_offsets(height, side, side / 2);
  std::vector<PatchOffset> out;
  out.reserve(xs.size() * ys.size());
  for (int y : ys)
    for (int x : xs) out.push_back({x, y});
  return out;
}

inline std::vector<PatchOffset> enumerate_patches(const LabeledSample& sample, int side) {
  return enumerate_patches(sample.mask.width(), sample.mask.height(), side);
}

/// Per-class pixel counts inside a window; index 256 is never used.
inline std::array<std::uint64_t, 256> window_histogram(const Mask& mask, int x, int y, int w, int h) {
  std::array<std::uint64_t, 256> hist{};
  for (int r = y; r < y + h; ++r) {
    const auto* row = mask.pixel(x, r);
    for (int c = 0; c < w; ++c) ++hist[row[c]];
  }
  return hist;
}

/// Rarity weight sum_i (c_max / c_i) * p_i over the window, rounded once.
/// Ignore pixels and classes absent from the training set contribute 0.
inline double patch_weight(const Mask& mask, int x, int y, int side, const ClassStats& stats) {
  const auto hist = window_histogram(mask, x, y, side, side);
  ExactSum sum;
  for (int cls = 0; cls < stats.class_count; ++cls)
    if (hist[cls] > 0 && cls != stats.ignore_index && stats.present(cls))
      sum.add_product(stats.factor(cls), hist[cls]);
  return sum.value();
}

inline double patch_weight(const Mask& window, const ClassStats& stats) {
  if (!window.square()) throw std::invalid_argument("patch window must be square");
  return patch_weight(window, 0, 0, window.width(), stats);
}

struct PatchDescriptor {
  std::size_t sample = 0;  // position in the sample list the index was built from
  int x = 0;
  int y = 0;
  int side = 0;
  double weight = 0.0;
};

struct ScaleIndex {
  int scale = 1;
  int side = 0;
  std::vector<PatchDescriptor> patches;
  std::vector<double> cumulative;  // running sum of weights in list order
  std::size_t skipped_samples = 0;

  double total() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

struct PatchIndex {
  int base_side = 0;
  std::vector<ScaleIndex> levels;

  const ScaleIndex& level(int scale) const {
    for (const auto& l : levels)
      if (l.scale == scale) return l;
    throw GenerationError("patch index has no scale " + std::to_string(scale));
  }

  const ScaleIndex& level_for_side(int side) const {
    for (const auto& l : levels)
      if (l.side == side) return l;
    throw GenerationError("patch index has no level with side " + std::to_string(side));
  }
};

inline ScaleIndex build_level(const std::vector<LabeledSample>& samples, const ClassStats& stats, int scale,
                              int side) {
  ScaleIndex level;
  level.scale = scale;
  level.side = side;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& m = samples[i].mask;
    if (side > m.width() || side > m.height()) {
      ++level.skipped_samples;
      continue;
    }
    for (const auto& off : enumerate_patches(m.width(), m.height(), side))
      level.patches.push_back({i, off.x, off.y, side, patch_weight(m, off.x, off.y, side, stats)});
  }
  level.cumulative.reserve(level.patches.size());
  double running = 0.0;
  for (const auto& p : level.patches) {
    running += p.weight;
    level.cumulative.push_back(running);
  }
  return level;
}

/// One weighted patch list per scale, side = base_side * scale, stride = side / 2.
inline PatchIndex build_index(const std::vector<LabeledSample>& samples, const ClassStats& stats, int base_side,
                              const std::vector<int>& scales) {
  if (scales.empty()) throw ConfigError("at least one scale is required");
  PatchIndex index;
  index.base_side = base_side;
  for (int s : scales) {
    if (s <= 0) throw ConfigError("scales must be positive");
    auto level = build_level(samples, stats, s, base_side * s);
    if (level.patches.empty())
      throw DatasetError("no sample is large enough for scale " + std::to_string(s) + " (side " +
                         std::to_string(base_side * s) + ")");
    if (!(level.total() > 0.0))
      throw DatasetError("scale " + std::to_string(s) + " has zero total patch weight");
    index.levels.push_back(std::move(level));
  }
  return index;
}

/// Audit dump: `sample_id<TAB>x<TAB>y<TAB>side<TAB>weight` per descriptor.
inline void dump_index(std::ostream& out, const PatchIndex& index, const std::vector<LabeledSample>& samples) {
  char buf[64];
  for (const auto& level : index.levels)
    for (const auto& p : level.patches) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.weight);
      out << samples[p.sample].id << '\t' << p.x << '\t' << p.y << '\t' << p.side << '\t' << buf << '\n';
    }
}

}  // namespace chessmix
