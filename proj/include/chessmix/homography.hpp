#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <utility>

#include "chessmix/error.hpp"

namespace chessmix {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

using Quad = std::array<Point2, 4>;

/// 3x3 projective map, row-major, normalized so m[8] == 1 whenever m[8] != 0.
class Homography {
 public:
  Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
  explicit Homography(const std::array<double, 9>& m) : m_(m) {
    // A zero bottom-right entry cannot be normalized; such maps are kept as given.
    if (m_[8] != 0.0 && m_[8] != 1.0)
      for (auto& v : m_) v /= m[8];
    if (std::fabs(determinant()) < 1e-12) throw GenerationError("homography is not invertible");
  }

  static Homography identity() { return {}; }

  const std::array<double, 9>& matrix() const noexcept { return m_; }
  double operator()(int r, int c) const noexcept { return m_[r * 3 + c]; }

  double determinant() const noexcept {
    const auto& a = m_;
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  Point2 apply(Point2 p) const noexcept {
    const auto& a = m_;
    const double w = a[6] * p.x + a[7] * p.y + a[8];
    return {(a[0] * p.x + a[1] * p.y + a[2]) / w, (a[3] * p.x + a[4] * p.y + a[5]) / w};
  }

  Homography inverse() const {
    const auto& a = m_;
    const double det = determinant();
    if (std::fabs(det) < 1e-12) throw GenerationError("homography is not invertible");
    std::array<double, 9> adj{
        a[4] * a[8] - a[5] * a[7], a[2] * a[7] - a[1] * a[8], a[1] * a[5] - a[2] * a[4],
        a[5] * a[6] - a[3] * a[8], a[0] * a[8] - a[2] * a[6], a[2] * a[3] - a[0] * a[5],
        a[3] * a[7] - a[4] * a[6], a[1] * a[6] - a[0] * a[7], a[0] * a[4] - a[1] * a[3]};
    // adj / det, then renormalized; the det factor cancels in the renormalization
    return Homography(adj);
  }

  friend bool operator==(const Homography&, const Homography&) = default;

 private:
  std::array<double, 9> m_;
};

namespace detail {

inline double cross(Point2 o, Point2 a, Point2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

inline void require_nondegenerate(const Quad& q, const char* which) {
  double extent = 0.0;
  for (const auto& p : q) extent = std::max({extent, std::fabs(p.x), std::fabs(p.y)});
  for (const auto& p : q) extent = std::max(extent, std::hypot(p.x - q[0].x, p.y - q[0].y));
  const double tol = 1e-12 * std::max(1.0, extent * extent);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (std::fabs(cross(q[i], q[j], q[k])) <= tol)
          throw GenerationError(std::string("degenerate ") + which + " quad: three corners are collinear");
}

/// Solves a dense n x n system in place with partial pivoting.
template <std::size_t N>
std::array<double, N> solve_dense(std::array<std::array<double, N + 1>, N> a) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-14) throw GenerationError("singular homography system");
    std::swap(a[col], a[pivot]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= N; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = a[i][N];
    for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace detail

/// Homography taking src[i] to dst[i] for the four correspondences, from the
/// standard 8x8 system with h33 fixed to 1.
inline Homography solve_homography(const Quad& src, const Quad& dst) {
  detail::require_nondegenerate(src, "source");
  detail::require_nondegenerate(dst, "destination");
  if (src == dst) return Homography::identity();

  std::array<std::array<double, 9>, 8> a{};
  for (int i = 0; i < 4; ++i) {
    const auto [x, y] = src[i];
    const auto [u, v] = dst[i];
    a[2 * i] = {x, y, 1, 0, 0, 0, -u * x, -u * y, u};
    a[2 * i + 1] = {0, 0, 0, x, y, 1, -v * x, -v * y, v};
  }
  const auto h = detail::solve_dense<8>(a);
  return Homography({h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0});
}

/// Largest distance between H(src[i]) and dst[i].
inline double corner_residual(const Homography& h, const Quad& src, const Quad& dst) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto p = h.apply(src[i]);
    worst = std::max(worst, std::hypot(p.x - dst[i].x, p.y - dst[i].y));
  }
  return worst;
}

}  // namespace chessmix
