#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "chessmix/raster.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("chessmix_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline chessmix::Image random_image(int w, int h, std::mt19937_64& gen) {
  chessmix::Image img = chessmix::make_image(w, h);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(d(gen));
  return img;
}

inline chessmix::Mask random_mask(int w, int h, int classes, std::mt19937_64& gen) {
  chessmix::Mask m = chessmix::make_mask(w, h);
  std::uniform_int_distribution<int> d(0, classes - 1);
  for (auto& v : m.data()) v = static_cast<std::uint8_t>(d(gen));
  return m;
}

}  // namespace testutil
