#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chessmix/raster.hpp"

namespace chessmix {

inline constexpr std::uint8_t kDefaultIgnoreIndex = 255;

/// An image and its class-index mask, identical dimensions.
struct LabeledSample {
  std::string id;
  Image image;
  Mask mask;
};

/// Where one filled chessboard cell came from.
struct CellProvenance {
  int row = 0;
  int col = 0;
  std::string sample_id;
  int x = 0;
  int y = 0;
  int side = 0;
  int scale = 1;
  std::string transform;  // serialized TransformSpec, replayable
};

struct SyntheticSample {
  std::string id;
  Image image;
  Mask mask;
  std::vector<CellProvenance> provenance;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  int scale = 1;
};

inline std::string synthetic_id(std::uint64_t stream_id) {
  std::string digits = std::to_string(stream_id);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "synthetic_" + digits;
}

}  // namespace chessmix
