#pragma once

#include <array>
#include <concepts>
#include <cstdint>

namespace chessmix {

/// Anything that yields doubles uniformly in [0, 1).
template <typename T>
concept UniformSource = requires(T& t) {
  { t.uniform() } -> std::convertible_to<double>;
};

/// Philox4x32-10 counter-based generator. The key is the 64-bit master seed,
/// the upper counter half is the stream id, the lower half counts blocks.
/// The sequence is a pure function of (seed, stream_id).
class RngStream {
 public:
  using Block = std::array<std::uint32_t, 4>;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : seed_(master_seed), stream_(stream_id) {}

  std::uint64_t master_seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept {
    if (lane_ == 2) {
      const auto b = philox({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                            {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      buf_[0] = (std::uint64_t{b[1]} << 32) | b[0];
      buf_[1] = (std::uint64_t{b[3]} << 32) | b[2];
      ++block_;
      lane_ = 0;
    }
    return buf_[lane_++];
  }

  /// 53-bit resolution draw in [0, 1).
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  static Block philox(Block ctr, std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  int lane_ = 2;
};

}  // namespace chessmix
