#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/homography.hpp"
#include "chessmix/raster.hpp"
#include "chessmix/rng.hpp"

namespace chessmix {

/// Probabilities and magnitudes of the per-patch transform pipeline.
struct TransformParams {
  double p_vflip = 0.5;
  double p_hflip = 0.5;
  double p_rot90 = 0.5;
  double p_transpose = 0.5;
  double p_distortion = 0.5;        // gate for drawing a distortion family
  double p_distortion_apply = 0.8;  // chance the drawn family is applied
  int grid_steps = 5;
  double grid_limit = 0.3;          // stretch factors in [1 - limit, 1 + limit]
  double perspective_limit = 0.05;  // corner offsets in [-limit, limit] * side

  void validate() const {
    for (double p : {p_vflip, p_hflip, p_rot90, p_transpose, p_distortion, p_distortion_apply})
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("transform probabilities must lie in [0, 1]");
    if (grid_steps < 1) throw ConfigError("grid_steps must be at least 1");
    if (!(grid_limit >= 0.0 && grid_limit < 1.0)) throw ConfigError("grid_limit must lie in [0, 1)");
    if (!(perspective_limit >= 0.0 && perspective_limit < 0.25))
      throw ConfigError("perspective_limit must lie in [0, 0.25)");
  }

  /// Every gate closed: sample_transform always yields the identity.
  static TransformParams none() {
    TransformParams p;
    p.p_vflip = p.p_hflip = p.p_rot90 = p.p_transpose = p.p_distortion = 0.0;
    return p;
  }
};

/// Per-axis cell stretch factors; extents are renormalized to the window side.
struct GridDistortion {
  int steps = 5;
  std::vector<double> x_stretch;
  std::vector<double> y_stretch;
  friend bool operator==(const GridDistortion&, const GridDistortion&) = default;
};

/// Corner offsets as fractions of the window side, order TL, TR, BR, BL.
struct PerspectiveDistortion {
  std::array<Point2, 4> corner_offsets{};
  friend bool operator==(const PerspectiveDistortion&, const PerspectiveDistortion&) = default;
};

using Distortion = std::variant<std::monostate, GridDistortion, PerspectiveDistortion>;

struct TransformSpec {
  bool vflip = false;
  bool hflip = false;
  int rot90_count = 0;  // counterclockwise quarter turns
  bool transpose = false;
  Distortion distortion;

  bool has_distortion() const noexcept { return !std::holds_alternative<std::monostate>(distortion); }
  bool is_identity() const noexcept { return !vflip && !hflip && rot90_count == 0 && !transpose && !has_distortion(); }
  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// Draws a concrete spec. Draw order is fixed: vflip, hflip, rot90 gate and
/// count, transpose, distortion gate, family, apply gate, then parameters.
template <UniformSource Rng>
TransformSpec sample_transform(Rng& rng, const TransformParams& p) {
  TransformSpec s;
  s.vflip = rng.uniform() < p.p_vflip;
  s.hflip = rng.uniform() < p.p_hflip;
  if (rng.uniform() < p.p_rot90) s.rot90_count = std::min(3, static_cast<int>(rng.uniform() * 4.0));
  s.transpose = rng.uniform() < p.p_transpose;
  if (rng.uniform() < p.p_distortion) {
    const bool grid = rng.uniform() < 0.5;
    if (rng.uniform() < p.p_distortion_apply) {
      auto sym = [&](double limit) { return limit * (2.0 * rng.uniform() - 1.0); };
      if (grid) {
        GridDistortion g;
        g.steps = p.grid_steps;
        for (int i = 0; i < g.steps; ++i) g.x_stretch.push_back(1.0 + sym(p.grid_limit));
        for (int i = 0; i < g.steps; ++i) g.y_stretch.push_back(1.0 + sym(p.grid_limit));
        s.distortion = std::move(g);
      } else {
        PerspectiveDistortion d;
        for (auto& c : d.corner_offsets) {
          c.x = sym(p.perspective_limit);
          c.y = sym(p.perspective_limit);
        }
        s.distortion = d;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Discrete pixel permutations

template <typename T>
Raster<T> flip_vertical(const Raster<T>& in) {
  Raster<T> out(in.width(), in.height(), in.channels());
  const auto row = static_cast<std::size_t>(in.width()) * in.channels();
  for (int y = 0; y < in.height(); ++y) {
    const T* s = in.pixel(0, in.height() - 1 - y);
    std::copy(s, s + row, out.pixel(0, y));
  }
  return out;
}

template <typename T>
Raster<T> flip_horizontal(const Raster<T>& in) {
  Raster<T> out(in.width(), in.height(), in.channels());
  const int ch = in.channels();
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x) {
      const T* s = in.pixel(in.width() - 1 - x, y);
      std::copy(s, s + ch, out.pixel(x, y));
    }
  return out;
}

/// out(x, y) = in(y, x)
template <typename T>
Raster<T> transpose(const Raster<T>& in) {
  Raster<T> out(in.height(), in.width(), in.channels());
  const int ch = in.channels();
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      const T* s = in.pixel(y, x);
      std::copy(s, s + ch, out.pixel(x, y));
    }
  return out;
}

/// One counterclockwise quarter turn of a square raster: out(x, y) = in(n-1-y, x).
template <typename T>
Raster<T> rotate90_ccw(const Raster<T>& in) {
  const int n = in.width();
  Raster<T> out(n, n, in.channels());
  const int ch = in.channels();
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const T* s = in.pixel(n - 1 - y, x);
      std::copy(s, s + ch, out.pixel(x, y));
    }
  return out;
}

/// vflip -> hflip -> rot90 -> transpose. Pure permutation, no interpolation.
template <typename T>
Raster<T> apply_discrete(const Raster<T>& window, const TransformSpec& spec) {
  if (!window.square()) throw GenerationError("transform window must be square");
  Raster<T> out = spec.vflip ? flip_vertical(window) : window;
  if (spec.hflip) out = flip_horizontal(out);
  for (int i = 0; i < ((spec.rot90_count % 4) + 4) % 4; ++i) out = rotate90_ccw(out);
  if (spec.transpose) out = transpose(out);
  return out;
}

// ---------------------------------------------------------------------------
// Continuous warps

/// Monotone piecewise-linear per-axis maps from output to source coordinates.
/// Knots span pixel-index space [0, side - 1]; output knots are uniform.
struct GridField {
  int side = 0;
  std::vector<double> out_knots;
  std::vector<double> x_src_knots;
  std::vector<double> y_src_knots;

  double map(const std::vector<double>& src, double t) const {
    const auto it = std::upper_bound(out_knots.begin(), out_knots.end(), t);
    auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - out_knots.begin()) - 1));
    j = std::min(j, out_knots.size() - 2);
    const double slope = (src[j + 1] - src[j]) / (out_knots[j + 1] - out_knots[j]);
    return src[j] + (t - out_knots[j]) * slope;
  }
  double source_x(double x) const { return map(x_src_knots, x); }
  double source_y(double y) const { return map(y_src_knots, y); }
};

inline GridField make_grid_field(const GridDistortion& g, int side) {
  if (g.steps < 1 || static_cast<int>(g.x_stretch.size()) != g.steps ||
      static_cast<int>(g.y_stretch.size()) != g.steps)
    throw GenerationError("grid distortion needs one stretch factor per step and axis");
  GridField f;
  f.side = side;
  const double span = side - 1;
  auto knots = [&](const std::vector<double>& factors) {
    double total = 0.0;
    for (double v : factors) {
      if (!(v > 0.0)) throw GenerationError("grid stretch factors must be positive");
      total += v;
    }
    std::vector<double> k{0.0};
    double running = 0.0;
    for (double v : factors) {
      running += v;
      k.push_back(span * running / total);
    }
    return k;
  };
  for (int j = 0; j <= g.steps; ++j) f.out_knots.push_back(span * j / g.steps);
  f.x_src_knots = knots(g.x_stretch);
  f.y_src_knots = knots(g.y_stretch);
  return f;
}

/// Source quad for a perspective spec: window corners displaced by the
/// offsets and clamped inside the window.
inline Quad perspective_source_quad(const PerspectiveDistortion& d, int side) {
  const double hi = side - 1;
  const Quad rect{{{0, 0}, {hi, 0}, {hi, hi}, {0, hi}}};
  Quad q;
  for (int i = 0; i < 4; ++i) {
    q[i].x = std::clamp(rect[i].x + d.corner_offsets[i].x * side, 0.0, hi);
    q[i].y = std::clamp(rect[i].y + d.corner_offsets[i].y * side, 0.0, hi);
  }
  return q;
}

/// Forward map taking the displaced source quad onto the full window.
inline Homography perspective_homography(const PerspectiveDistortion& d, int side) {
  const double hi = side - 1;
  const Quad rect{{{0, 0}, {hi, 0}, {hi, hi}, {0, hi}}};
  return solve_homography(perspective_source_quad(d, side), rect);
}

/// Reflect-101 index extension (gfedcb|abcdefgh|gfedcba).
inline int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

using WarpMapping = std::variant<Homography, GridField>;

namespace detail {

template <typename SourceFn>
Raster<std::uint8_t> resample(const Raster<std::uint8_t>& in, bool is_mask, SourceFn&& source) {
  const int w = in.width(), h = in.height(), ch = in.channels();
  Raster<std::uint8_t> out(w, h, ch);
  const double lo = -4.0 * std::max(w, h), hi = 5.0 * std::max(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto [sx, sy] = source(x, y);
      sx = std::isfinite(sx) ? std::clamp(sx, lo, hi) : 0.0;
      sy = std::isfinite(sy) ? std::clamp(sy, lo, hi) : 0.0;
      std::uint8_t* d = out.pixel(x, y);
      if (is_mask) {
        const int ix = reflect101(static_cast<int>(std::floor(sx + 0.5)), w);
        const int iy = reflect101(static_cast<int>(std::floor(sy + 0.5)), h);
        const std::uint8_t* s = in.pixel(ix, iy);
        std::copy(s, s + ch, d);
        continue;
      }
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const double fx = sx - fx0, fy = sy - fy0;
      const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
      const std::uint8_t* p00 = in.pixel(reflect101(x0, w), reflect101(y0, h));
      const std::uint8_t* p10 = in.pixel(reflect101(x0 + 1, w), reflect101(y0, h));
      const std::uint8_t* p01 = in.pixel(reflect101(x0, w), reflect101(y0 + 1, h));
      const std::uint8_t* p11 = in.pixel(reflect101(x0 + 1, w), reflect101(y0 + 1, h));
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - fx) * p00[c] + fx * p10[c];
        const double bot = (1.0 - fx) * p01[c] + fx * p11[c];
        const double v = (1.0 - fy) * top + fy * bot;
        d[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  return out;
}

}  // namespace detail

/// Inverse-warp resampling: bilinear for images, nearest for masks,
/// reflect-101 outside the window. A Homography is the forward map
/// (source -> output); a GridField already maps output -> source.
inline Raster<std::uint8_t> warp(const Raster<std::uint8_t>& window, const WarpMapping& mapping, bool is_mask) {
  if (const auto* h = std::get_if<Homography>(&mapping)) {
    const auto inv = h->inverse();
    return detail::resample(window, is_mask, [&](int x, int y) {
      const auto p = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      return std::pair{p.x, p.y};
    });
  }
  const auto& g = std::get<GridField>(mapping);
  if (g.side != window.width() || g.side != window.height())
    throw GenerationError("grid field does not match the window size");
  if (g.side < 2) return window;
  std::vector<double> xs(window.width()), ys(window.height());
  for (int x = 0; x < window.width(); ++x) xs[x] = g.source_x(x);
  for (int y = 0; y < window.height(); ++y) ys[y] = g.source_y(y);
  return detail::resample(window, is_mask, [&](int x, int y) { return std::pair{xs[x], ys[y]}; });
}

/// Concrete warp mapping for a spec's distortion on a side x side window.
inline WarpMapping distortion_mapping(const Distortion& d, int side) {
  if (const auto* g = std::get_if<GridDistortion>(&d)) return make_grid_field(*g, side);
  if (const auto* p = std::get_if<PerspectiveDistortion>(&d)) return perspective_homography(*p, side);
  return Homography::identity();
}

/// Same geometric mapping for image and mask: discrete steps, then distortion.
inline std::pair<Image, Mask> apply_transform(const Image& image_window, const Mask& mask_window,
                                              const TransformSpec& spec) {
  if (image_window.width() != mask_window.width() || image_window.height() != mask_window.height())
    throw GenerationError("image and mask windows differ in size");
  Image img = apply_discrete(image_window, spec);
  Mask msk = apply_discrete(mask_window, spec);
  if (spec.has_distortion() && img.width() > 1) {
    const auto mapping = distortion_mapping(spec.distortion, img.width());
    img = warp(img, mapping, false);
    msk = warp(msk, mapping, true);
  }
  return {std::move(img), std::move(msk)};
}

// ---------------------------------------------------------------------------
// Text form, used in provenance records

inline std::string to_string(const TransformSpec& s) {
  std::ostringstream out;
  out << "vf=" << s.vflip << ";hf=" << s.hflip << ";rot=" << s.rot90_count << ";tr=" << s.transpose;
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto list = [&](const std::vector<double>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? "," : "") + num(v[i]);
    return r;
  };
  if (const auto* g = std::get_if<GridDistortion>(&s.distortion)) {
    out << ";dist=grid;steps=" << g->steps << ";gx=" << list(g->x_stretch) << ";gy=" << list(g->y_stretch);
  } else if (const auto* p = std::get_if<PerspectiveDistortion>(&s.distortion)) {
    std::vector<double> flat;
    for (const auto& c : p->corner_offsets) {
      flat.push_back(c.x);
      flat.push_back(c.y);
    }
    out << ";dist=persp;d=" << list(flat);
  } else {
    out << ";dist=none";
  }
  return out.str();
}

inline TransformSpec parse_transform_spec(const std::string& text) {
  TransformSpec s;
  std::string dist = "none";
  GridDistortion g;
  std::vector<double> persp;
  auto doubles = [](const std::string& v) {
    std::vector<double> r;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) r.push_back(std::stod(item));
    return r;
  };
  std::stringstream ss(text);
  std::string field;
  try {
    while (std::getline(ss, field, ';')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw std::invalid_argument(field);
      const auto key = field.substr(0, eq), val = field.substr(eq + 1);
      if (key == "vf") s.vflip = val == "1";
      else if (key == "hf") s.hflip = val == "1";
      else if (key == "rot") s.rot90_count = std::stoi(val);
      else if (key == "tr") s.transpose = val == "1";
      else if (key == "dist") dist = val;
      else if (key == "steps") g.steps = std::stoi(val);
      else if (key == "gx") g.x_stretch = doubles(val);
      else if (key == "gy") g.y_stretch = doubles(val);
      else if (key == "d") persp = doubles(val);
      else throw std::invalid_argument(key);
    }
  } catch (const std::exception&) {
    throw GenerationError("malformed transform spec '" + text + "'");
  }
  if (dist == "grid") {
    s.distortion = g;
  } else if (dist == "persp") {
    if (persp.size() != 8) throw GenerationError("perspective spec needs 8 offsets");
    PerspectiveDistortion p;
    for (int i = 0; i < 4; ++i) p.corner_offsets[i] = {persp[2 * i], persp[2 * i + 1]};
    s.distortion = p;
  } else if (dist != "none") {
    throw GenerationError("unknown distortion '" + dist + "'");
  }
  return s;
}

/// Distinct values present in a raster (used for label-closure checks).
template <typename T>
std::set<T> value_set(const Raster<T>& r) {
  return {r.data().begin(), r.data().end()};
}

}  // namespace chessmix
