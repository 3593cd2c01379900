#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "chessmix/transforms.hpp"
#include "test_util.hpp"

using namespace chessmix;

namespace {

/// Replays a fixed list of uniforms, then repeats the last one.
struct ScriptedSource {
  std::vector<double> values;
  std::size_t next = 0;
  double uniform() { return values[std::min(next++, values.size() - 1)]; }
};

std::map<std::uint8_t, std::size_t> histogram(const Raster<std::uint8_t>& r) {
  std::map<std::uint8_t, std::size_t> h;
  for (auto v : r.data()) ++h[v];
  return h;
}

Mask tiny(std::initializer_list<std::uint8_t> v) {
  Mask m = make_mask(2, 2);
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

const Quad kUnit{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

}  // namespace

TEST(SampleTransform, AllGatesClosedGiveIdentity) {
  ScriptedSource src{{0.99}};
  EXPECT_TRUE(sample_transform(src, TransformParams{}).is_identity());
  RngStream r(1, 1);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_transform(r, TransformParams::none()).is_identity());
}

TEST(SampleTransform, ScriptedDrawOrder) {
  // vflip, hflip, rot gate, rot count, transpose, distortion gate, family(grid), apply, 10 factors
  std::vector<double> v{0.1, 0.9, 0.2, 0.6, 0.3, 0.1, 0.2, 0.5};
  for (int i = 0; i < 10; ++i) v.push_back(0.5);
  ScriptedSource src{v};
  const auto s = sample_transform(src, TransformParams{});
  EXPECT_TRUE(s.vflip);
  EXPECT_FALSE(s.hflip);
  EXPECT_EQ(s.rot90_count, 2);
  EXPECT_TRUE(s.transpose);
  const auto* g = std::get_if<GridDistortion>(&s.distortion);
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->x_stretch, std::vector<double>(5, 1.0));

  // distortion gate open but apply gate (0.8) closed
  ScriptedSource closed{{0.9, 0.9, 0.9, 0.9, 0.1, 0.7, 0.85}};
  EXPECT_TRUE(sample_transform(closed, TransformParams{}).is_identity());
}

TEST(SampleTransform, FrequenciesWithinThreeSigma) {
  RngStream r(123, 0);
  const int n = 100000;
  int vflip = 0, distorted = 0, identity_rot = 0, grid = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_transform(r, TransformParams{});
    vflip += s.vflip;
    distorted += s.has_distortion();
    identity_rot += s.rot90_count == 0;
    grid += std::holds_alternative<GridDistortion>(s.distortion);
    if (const auto* g = std::get_if<GridDistortion>(&s.distortion)) {
      for (double f : g->x_stretch) ASSERT_TRUE(f >= 0.7 && f <= 1.3);
    }
    if (const auto* p = std::get_if<PerspectiveDistortion>(&s.distortion)) {
      for (const auto& c : p->corner_offsets) ASSERT_TRUE(std::fabs(c.x) <= 0.05 && std::fabs(c.y) <= 0.05);
    }
  }
  auto within = [&](int count, double p) { return std::abs(count - n * p) <= 3.0 * std::sqrt(n * p * (1 - p)); };
  EXPECT_TRUE(within(vflip, 0.5)) << vflip;
  EXPECT_TRUE(within(distorted, 0.4)) << distorted;
  EXPECT_TRUE(within(identity_rot, 0.625)) << identity_rot;
  EXPECT_TRUE(within(grid, 0.2)) << grid;
}

TEST(ApplyDiscrete, IdentityAndInvolutions) {
  std::mt19937_64 gen(1);
  const auto img = testutil::random_image(9, 9, gen);
  EXPECT_EQ(apply_discrete(img, TransformSpec{}), img);
  TransformSpec v;
  v.vflip = true;
  EXPECT_EQ(apply_discrete(apply_discrete(img, v), v), img);
  TransformSpec h;
  h.hflip = true;
  EXPECT_EQ(apply_discrete(apply_discrete(img, h), h), img);
  TransformSpec t;
  t.transpose = true;
  EXPECT_EQ(apply_discrete(apply_discrete(img, t), t), img);
  TransformSpec r;
  r.rot90_count = 1;
  auto x = img;
  for (int i = 0; i < 4; ++i) x = apply_discrete(x, r);
  EXPECT_EQ(x, img);
}

TEST(ApplyDiscrete, HandPermutations) {
  // [[a,b],[c,d]] with a=1 b=2 c=3 d=4 stored row-major
  const auto m = tiny({1, 2, 3, 4});
  TransformSpec s;
  s.rot90_count = 1;
  EXPECT_EQ(apply_discrete(m, s), tiny({2, 4, 1, 3}));
  s = {};
  s.vflip = true;
  EXPECT_EQ(apply_discrete(m, s), tiny({3, 4, 1, 2}));
  s = {};
  s.hflip = true;
  EXPECT_EQ(apply_discrete(m, s), tiny({2, 1, 4, 3}));
  s = {};
  s.transpose = true;
  EXPECT_EQ(apply_discrete(m, s), tiny({1, 3, 2, 4}));
  // vflip -> hflip -> rot90 -> transpose:
  // [[1,2],[3,4]] -> [[3,4],[1,2]] -> [[4,3],[2,1]] -> [[3,1],[4,2]] -> [[3,4],[1,2]]
  s = {true, true, 1, true, {}};
  EXPECT_EQ(apply_discrete(m, s), tiny({3, 4, 1, 2}));
}

TEST(ApplyDiscrete, NonSquareRejected) {
  EXPECT_THROW(apply_discrete(make_mask(3, 2), TransformSpec{}), GenerationError);
}

TEST(SolveHomography, IdentityAndTranslation) {
  const auto h = solve_homography(kUnit, kUnit);
  EXPECT_EQ(h, Homography::identity());

  const Quad moved{{{2.5, -1}, {3.5, -1}, {3.5, 0}, {2.5, 0}}};
  const auto t = solve_homography(kUnit, moved);
  const std::array<double, 9> expected{1, 0, 2.5, 0, 1, -1, 0, 0, 1};
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(t.matrix()[i], expected[i], 1e-12) << i;
}

TEST(SolveHomography, GeneralQuadReproducesCorners) {
  const Quad dst{{{0, 0}, {1, 0}, {0.9, 0.9}, {0, 1}}};
  const auto h = solve_homography(kUnit, dst);
  EXPECT_LT(corner_residual(h, kUnit, dst), 1e-9);
  EXPECT_EQ(h.matrix()[8], 1.0);

  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> off(-0.05, 0.05);
  for (int trial = 0; trial < 1000; ++trial) {
    const double n = 99;
    Quad src{{{0, 0}, {n, 0}, {n, n}, {0, n}}};
    Quad d = src;
    for (auto& p : d) {
      p.x += off(gen) * 100;
      p.y += off(gen) * 100;
    }
    const auto hh = solve_homography(src, d);
    EXPECT_LT(corner_residual(hh, src, d), 1e-9);
    const auto back = hh.inverse();
    EXPECT_LT(corner_residual(back, d, src), 1e-9);
  }
}

TEST(SolveHomography, DegenerateQuadRejected) {
  const Quad collinear{{{0, 0}, {1, 1}, {2, 2}, {0, 1}}};
  EXPECT_THROW(solve_homography(kUnit, collinear), GenerationError);
  EXPECT_THROW(solve_homography(collinear, kUnit), GenerationError);
}

TEST(Warp, IdentityMappingsAreExact) {
  std::mt19937_64 gen(3);
  const auto img = testutil::random_image(31, 31, gen);
  const auto mask = testutil::random_mask(31, 31, 6, gen);
  EXPECT_EQ(warp(img, Homography::identity(), false), img);
  EXPECT_EQ(warp(mask, Homography::identity(), true), mask);

  for (int steps : {1, 3, 5, 7}) {
    GridDistortion g{steps, std::vector<double>(steps, 1.0), std::vector<double>(steps, 1.0)};
    const auto field = make_grid_field(g, 31);
    EXPECT_EQ(warp(img, field, false), img) << steps;
    EXPECT_EQ(warp(mask, field, true), mask) << steps;
  }
  TransformSpec zero_persp;
  zero_persp.distortion = PerspectiveDistortion{};
  EXPECT_EQ(apply_transform(img, mask, zero_persp), std::pair(img, mask));
}

TEST(Warp, ConstantRasterStaysConstant) {
  Image img = make_image(40, 40);
  std::fill(img.data().begin(), img.data().end(), std::uint8_t{173});
  RngStream r(4, 4);
  TransformParams always = TransformParams{};
  always.p_distortion = 1.0;
  always.p_distortion_apply = 1.0;
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_transform(r, always);
    ASSERT_TRUE(s.has_distortion());
    EXPECT_EQ(apply_transform(img, make_mask(40, 40, 3), s).first, img);
  }
}

TEST(Warp, NonInvertibleHomographyRejected) {
  EXPECT_THROW(Homography({1, 2, 3, 2, 4, 6, 0, 0, 1}), GenerationError);
}

TEST(Warp, Reflect101) {
  EXPECT_EQ(reflect101(-1, 5), 1);
  EXPECT_EQ(reflect101(-2, 5), 2);
  EXPECT_EQ(reflect101(5, 5), 3);
  EXPECT_EQ(reflect101(6, 5), 2);
  EXPECT_EQ(reflect101(13, 5), 3);
  EXPECT_EQ(reflect101(-7, 1), 0);
}

TEST(ApplyTransform, LabelClosureOverRandomSpecs) {
  std::mt19937_64 gen(5);
  RngStream r(5, 0);
  TransformParams heavy;
  heavy.p_distortion = 1.0;
  for (int i = 0; i < 2000; ++i) {
    const int side = 8 + 2 * (i % 5);
    const auto img = testutil::random_image(side, side, gen);
    auto mask = testutil::random_mask(side, side, 3, gen);
    mask.at(0, 0) = 255;
    const auto before = value_set(mask);
    const auto spec = sample_transform(r, heavy);
    const auto [oi, om] = apply_transform(img, mask, spec);
    ASSERT_EQ(oi.width(), side);
    ASSERT_EQ(om.height(), side);
    for (auto v : value_set(om)) ASSERT_TRUE(before.count(v)) << int(v) << " " << to_string(spec);
  }
}

TEST(ApplyTransform, SingleClassMaskStaysSingleClass) {
  RngStream r(6, 0);
  TransformParams heavy;
  heavy.p_distortion = 1.0;
  std::mt19937_64 gen(6);
  for (int i = 0; i < 200; ++i) {
    const auto [img, mask] = apply_transform(testutil::random_image(20, 20, gen), make_mask(20, 20, 4),
                                             sample_transform(r, heavy));
    EXPECT_EQ(value_set(mask), std::set<std::uint8_t>{4});
  }
}

TEST(ApplyTransform, DiscreteSpecsPreserveHistograms) {
  std::mt19937_64 gen(7);
  RngStream r(7, 0);
  for (int i = 0; i < 500; ++i) {
    const auto img = testutil::random_image(12, 12, gen);
    const auto mask = testutil::random_mask(12, 12, 5, gen);
    const auto spec = sample_transform(r, [] {
      auto p = TransformParams{};
      p.p_distortion = 0.0;
      return p;
    }());
    const auto [oi, om] = apply_transform(img, mask, spec);
    EXPECT_EQ(histogram(oi), histogram(img));
    EXPECT_EQ(histogram(om), histogram(mask));
  }
}

TEST(ApplyTransform, SameMappingForImageAndMask) {
  // mask carries the same values as the image's first channel; nearest and
  // bilinear agree wherever the source point lands exactly on a pixel
  std::mt19937_64 gen(8);
  RngStream r(8, 0);
  for (int i = 0; i < 200; ++i) {
    auto img = testutil::random_image(10, 10, gen);
    Mask mask = make_mask(10, 10);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x) mask.at(x, y) = img.at(x, y, 0);
    TransformParams p;
    p.p_distortion = 0.0;
    const auto [oi, om] = apply_transform(img, mask, sample_transform(r, p));
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 10; ++x) ASSERT_EQ(om.at(x, y), oi.at(x, y, 0));
  }
}

TEST(TransformSpec, TextRoundTripAndPurity) {
  RngStream r(9, 0);
  TransformParams heavy;
  heavy.p_distortion = 1.0;
  std::mt19937_64 gen(9);
  const auto img = testutil::random_image(16, 16, gen);
  const auto mask = testutil::random_mask(16, 16, 3, gen);
  for (int i = 0; i < 300; ++i) {
    const auto spec = sample_transform(r, heavy);
    const auto back = parse_transform_spec(to_string(spec));
    EXPECT_EQ(back, spec);
    EXPECT_EQ(apply_transform(img, mask, spec), apply_transform(img, mask, back));
  }
  EXPECT_THROW(parse_transform_spec("vf=1;bogus=2"), GenerationError);
}

TEST(TransformParams, Validation) {
  EXPECT_NO_THROW(TransformParams{}.validate());
  TransformParams p;
  p.grid_limit = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = {};
  p.p_vflip = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
}
