#pragma once

#include <png.h>

#include <cstring>
#include <filesystem>
#include <string>

#include "chessmix/error.hpp"
#include "chessmix/raster.hpp"

namespace chessmix::png {

namespace detail {

class ReadHandle {
 public:
  explicit ReadHandle(const std::filesystem::path& path) {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image_, path.c_str()))
      throw DatasetError("cannot read PNG '" + path.string() + "': " + image_.message);
  }
  ~ReadHandle() { png_image_free(&image_); }
  ReadHandle(const ReadHandle&) = delete;
  ReadHandle& operator=(const ReadHandle&) = delete;

  png_image& get() noexcept { return image_; }

 private:
  png_image image_;
};

inline void finish_read(ReadHandle& h, Raster<std::uint8_t>& out, png_uint_32 format,
                        const std::filesystem::path& path) {
  auto& img = h.get();
  img.format = format;
  out = Raster<std::uint8_t>(static_cast<int>(img.width), static_cast<int>(img.height),
                             static_cast<int>(PNG_IMAGE_SAMPLE_CHANNELS(format)));
  if (!png_image_finish_read(&img, nullptr, out.data().data(), 0, nullptr))
    throw DatasetError("cannot decode PNG '" + path.string() + "': " + img.message);
}

inline void write(const std::filesystem::path& path, const Raster<std::uint8_t>& r,
                  png_uint_32 format) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(r.width());
  img.height = static_cast<png_uint_32>(r.height());
  img.format = format;
  const int ok = png_image_write_to_file(&img, path.c_str(), 0, r.data().data(), 0, nullptr);
  const std::string msg = img.message;
  png_image_free(&img);
  if (!ok) throw GenerationError("cannot write PNG '" + path.string() + "': " + msg);
}

}  // namespace detail

/// Reads an 8-bit RGB PNG. Alpha, 16-bit and grayscale inputs are rejected.
inline Image read_rgb(const std::filesystem::path& path) {
  detail::ReadHandle h(path);
  const auto fmt = h.get().format;
  if ((fmt & PNG_FORMAT_FLAG_LINEAR) || (fmt & PNG_FORMAT_FLAG_ALPHA) ||
      !(fmt & PNG_FORMAT_FLAG_COLOR))
    throw DatasetError("'" + path.string() + "' is not an 8-bit 3-channel PNG");
  Image out;
  detail::finish_read(h, out, PNG_FORMAT_RGB, path);
  return out;
}

/// Reads an 8-bit single-channel index PNG. Color or palette masks are rejected
/// since converting them to gray would alter class indices.
inline Mask read_index(const std::filesystem::path& path) {
  detail::ReadHandle h(path);
  const auto fmt = h.get().format;
  if ((fmt & PNG_FORMAT_FLAG_LINEAR) || (fmt & PNG_FORMAT_FLAG_COLOR) ||
      (fmt & PNG_FORMAT_FLAG_ALPHA) || (fmt & PNG_FORMAT_FLAG_COLORMAP))
    throw DatasetError("'" + path.string() + "' is not an 8-bit single-channel index PNG");
  Mask out;
  detail::finish_read(h, out, PNG_FORMAT_GRAY, path);
  return out;
}

inline void write_rgb(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 3) throw GenerationError("write_rgb expects 3 channels");
  detail::write(path, img, PNG_FORMAT_RGB);
}

inline void write_index(const std::filesystem::path& path, const Mask& mask) {
  if (mask.channels() != 1) throw GenerationError("write_index expects 1 channel");
  detail::write(path, mask, PNG_FORMAT_GRAY);
}

}  // namespace chessmix::png
