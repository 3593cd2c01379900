#pragma once

#include <stdexcept>
#include <vector>

namespace chessmix {

/// Window offsets along one axis: 0, stride, 2*stride, ... while the window
/// fits, plus one edge-flush offset (extent - window) if the strides do not
/// land on the far edge exactly. Output is strictly increasing.
inline std::vector<int> sliding_offsets(int extent, int window, int stride) {
  if (window <= 0 || stride <= 0) throw std::invalid_argument("window and stride must be positive");
  if (window > extent) throw std::invalid_argument("window larger than extent");
  std::vector<int> out;
  for (int p = 0; p + window <= extent; p += stride) out.push_back(p);
  if (out.back() + window < extent) out.push_back(extent - window);
  return out;
}

}  // namespace chessmix
