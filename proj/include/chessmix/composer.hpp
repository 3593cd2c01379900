#pragma once

#include <string>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/rng.hpp"
#include "chessmix/sample.hpp"
#include "chessmix/sampler.hpp"
#include "chessmix/stats_index.hpp"
#include "chessmix/transforms.hpp"

namespace chessmix {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Chessboard grid: cell (r, c) is filled iff r + c is even, so (0, 0) is
/// always filled and no two filled cells share an edge.
struct ChessLayout {
  int image_side = 0;
  int cell_side = 0;
  int grid_n = 0;
  std::vector<Cell> filled;  // row-major
  std::vector<Cell> empty;   // row-major

  static bool is_filled(int row, int col) noexcept { return (row + col) % 2 == 0; }
};

inline ChessLayout make_layout(int image_side, int cell_side) {
  if (cell_side <= 0 || image_side <= 0 || image_side % cell_side != 0)
    throw ConfigError("image side " + std::to_string(image_side) + " is not a multiple of cell side " +
                      std::to_string(cell_side));
  ChessLayout l;
  l.image_side = image_side;
  l.cell_side = cell_side;
  l.grid_n = image_side / cell_side;
  for (int r = 0; r < l.grid_n; ++r)
    for (int c = 0; c < l.grid_n; ++c) (ChessLayout::is_filled(r, c) ? l.filled : l.empty).push_back({r, c});
  return l;
}

/// Horizontal neighbour receiving a filled cell's mirror: even columns mirror
/// right, odd columns left, falling back to the other side at the border.
/// Returns -1 when the grid has a single column.
inline int mirror_target_col(int col, int grid_n) {
  if (grid_n < 2) return -1;
  int target = col % 2 == 0 ? col + 1 : col - 1;
  if (target < 0 || target >= grid_n) target = col % 2 == 0 ? col - 1 : col + 1;
  return target;
}

/// Writes the horizontally flipped pixels of each filled cell into its mirror
/// target cell. The mask is left untouched, so mirrored cells stay ignored.
inline void mirror_fill(SyntheticSample& sample, const ChessLayout& layout) {
  const int cs = layout.cell_side;
  for (const auto& cell : layout.filled) {
    const int target = mirror_target_col(cell.col, layout.grid_n);
    if (target < 0) continue;
    const auto flipped = flip_horizontal(crop(sample.image, cell.col * cs, cell.row * cs, cs, cs));
    paste(sample.image, flipped, target * cs, cell.row * cs);
  }
}

/// Fills the layout's filled cells in row-major order. Per cell: weighted
/// patch draw, then a freshly sampled transform, both from `rng`. Empty cells
/// are black in the image and ignore_index in the mask.
inline SyntheticSample compose(RngStream& rng, const ChessLayout& layout, const PatchIndex& index,
                               const std::vector<LabeledSample>& samples, const SamplingConfig& config,
                               const TransformParams& params, std::uint8_t ignore_index) {
  const auto& level = index.level_for_side(layout.cell_side);
  const int cs = layout.cell_side;
  SyntheticSample out;
  out.stream_id = rng.stream_id();
  out.seed = rng.master_seed();
  out.id = synthetic_id(out.stream_id);
  out.scale = level.scale;
  out.image = make_image(layout.image_side, layout.image_side);
  out.mask = make_mask(layout.image_side, layout.image_side, ignore_index);

  for (const auto& cell : layout.filled) {
    const auto& patch = choose_patch(rng, level);
    const auto& src = samples.at(patch.sample);
    const auto spec = sample_transform(rng, params);
    auto [img, msk] = apply_transform(crop(src.image, patch.x, patch.y, cs, cs),
                                      crop(src.mask, patch.x, patch.y, cs, cs), spec);
    paste(out.image, img, cell.col * cs, cell.row * cs);
    paste(out.mask, msk, cell.col * cs, cell.row * cs);
    out.provenance.push_back({cell.row, cell.col, src.id, patch.x, patch.y, cs, level.scale, to_string(spec)});
  }
  if (config.mirror_patches) mirror_fill(out, layout);
  return out;
}

}  // namespace chessmix
