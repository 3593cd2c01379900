#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace chessmix {

/// Dense row-major interleaved raster. Pixel (x, y) channel c lives at
/// ((y * width + x) * channels + c).
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, int channels, T fill = T{})
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * height * channels, fill) {
    if (width < 0 || height < 0 || channels <= 0) throw std::invalid_argument("bad raster shape");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return width_ == height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  T& at(int x, int y, int c = 0) noexcept {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& at(int x, int y, int c = 0) const noexcept {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  T* pixel(int x, int y) noexcept { return &at(x, y, 0); }
  const T* pixel(int x, int y) const noexcept { return &at(x, y, 0); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool same_shape(const Raster& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using Image = Raster<std::uint8_t>;  // 3 channels, 8 bits each
using Mask = Raster<std::uint8_t>;   // 1 channel of class indices

inline Image make_image(int width, int height) { return Image(width, height, 3); }
inline Mask make_mask(int width, int height, std::uint8_t fill = 0) { return Mask(width, height, 1, fill); }

/// Copies the w x h window with top-left corner (x, y).
template <typename T>
Raster<T> crop(const Raster<T>& src, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > src.width() || y + h > src.height())
    throw std::out_of_range("crop window outside raster");
  Raster<T> out(w, h, src.channels());
  const auto row = static_cast<std::size_t>(w) * src.channels();
  for (int r = 0; r < h; ++r) {
    const T* s = src.pixel(x, y + r);
    T* d = out.pixel(0, r);
    std::copy(s, s + row, d);
  }
  return out;
}

/// Writes `src` into `dst` with its top-left corner at (x, y).
template <typename T>
void paste(Raster<T>& dst, const Raster<T>& src, int x, int y) {
  if (src.channels() != dst.channels() || x < 0 || y < 0 || x + src.width() > dst.width() ||
      y + src.height() > dst.height())
    throw std::out_of_range("paste window outside raster");
  const auto row = static_cast<std::size_t>(src.width()) * src.channels();
  for (int r = 0; r < src.height(); ++r) {
    const T* s = src.pixel(0, r);
    std::copy(s, s + row, dst.pixel(x, y + r));
  }
}

}  // namespace chessmix
