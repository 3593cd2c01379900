#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "chessmix/dataset_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace chessmix;
using testutil::TempDir;

namespace {

void write_pair(const fs::path& dir, const std::string& id, const Image& img, const Mask& mask) {
  png::write_rgb(dir / (id + "_image.png"), img);
  png::write_index(dir / (id + "_mask.png"), mask);
}

void write_manifest(const fs::path& path, const std::string& header, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!header.empty()) out << header << '\n';
  for (const auto& id : ids) out << id << '\t' << id << "_image.png\t" << id << "_mask.png\n";
}

LabeledSample solid_sample(const std::string& id, int w, int h, std::uint8_t cls) {
  return {id, make_image(w, h), make_mask(w, h, cls)};
}

}  // namespace

TEST(LoadDataset, TwoValidPairsInferClassCount) {
  TempDir dir("load");
  std::mt19937_64 gen(1);
  write_pair(dir.path(), "a", testutil::random_image(16, 12, gen), testutil::random_mask(16, 12, 3, gen));
  auto m = testutil::random_mask(16, 12, 2, gen);
  m.at(0, 0) = 255;
  write_pair(dir.path(), "b", testutil::random_image(16, 12, gen), m);
  write_manifest(dir.path() / "m.tsv", "", {"a", "b"});

  const auto ds = load_dataset(dir.path() / "m.tsv");
  ASSERT_EQ(ds.samples.size(), 2u);
  EXPECT_EQ(ds.manifest.class_count, 3);
  EXPECT_EQ(ds.manifest.ignore_index, 255);
  EXPECT_EQ(ds.samples[0].id, "a");
  EXPECT_EQ(ds.samples[1].mask.at(0, 0), 255);
}

TEST(LoadDataset, HeaderDeclaresClassesAndIgnore) {
  TempDir dir("hdr");
  write_pair(dir.path(), "a", make_image(4, 4), make_mask(4, 4, 1));
  write_manifest(dir.path() / "m.tsv", "classes=6 ignore=9", {"a"});
  const auto ds = load_dataset(dir.path() / "m.tsv");
  EXPECT_EQ(ds.manifest.class_count, 6);
  EXPECT_EQ(ds.manifest.ignore_index, 9);
}

TEST(LoadDataset, DimensionMismatchIsRejected) {
  TempDir dir("dim");
  png::write_rgb(dir.path() / "a_image.png", make_image(101, 100));
  png::write_index(dir.path() / "a_mask.png", make_mask(100, 100));
  write_manifest(dir.path() / "m.tsv", "", {"a"});
  EXPECT_THROW(load_dataset(dir.path() / "m.tsv"), DatasetError);
}

TEST(LoadDataset, OutOfRangeMaskValueIsRejected) {
  TempDir dir("range");
  auto mask = make_mask(8, 8, 1);
  mask.at(3, 3) = 7;
  write_pair(dir.path(), "a", make_image(8, 8), mask);
  write_manifest(dir.path() / "m.tsv", "classes=3", {"a"});
  EXPECT_THROW(load_dataset(dir.path() / "m.tsv"), DatasetError);
}

TEST(LoadDataset, MissingFilesAndBadManifests) {
  TempDir dir("missing");
  EXPECT_THROW(load_dataset(dir.path() / "absent.tsv"), DatasetError);
  write_manifest(dir.path() / "m.tsv", "", {"ghost"});
  EXPECT_THROW(load_dataset(dir.path() / "m.tsv"), DatasetError);

  write_pair(dir.path(), "a", make_image(4, 4), make_mask(4, 4));
  write_manifest(dir.path() / "dup.tsv", "", {"a", "a"});
  EXPECT_THROW(load_dataset(dir.path() / "dup.tsv"), DatasetError);
  write_manifest(dir.path() / "overlap.tsv", "classes=4 ignore=2", {"a"});
  EXPECT_THROW(load_dataset(dir.path() / "overlap.tsv"), DatasetError);
  write_manifest(dir.path() / "empty.tsv", "classes=4", {});
  EXPECT_THROW(load_dataset(dir.path() / "empty.tsv"), DatasetError);
}

TEST(LoadDataset, ColorMaskIsRejected) {
  TempDir dir("color");
  png::write_rgb(dir.path() / "a_image.png", make_image(4, 4));
  png::write_rgb(dir.path() / "a_mask.png", make_image(4, 4));
  write_manifest(dir.path() / "m.tsv", "", {"a"});
  EXPECT_THROW(load_dataset(dir.path() / "m.tsv"), DatasetError);
}

TEST(TileDataset, TileEqualToImageGivesOneTile) {
  const auto tiles = tile_dataset({solid_sample("s", 800, 800, 0)}, 800, 0.5);
  ASSERT_EQ(tiles.size(), 1u);
  EXPECT_EQ(tiles[0].id, "s_t0_0");
}

TEST(TileDataset, WideImageHalfOverlap) {
  std::mt19937_64 gen(2);
  LabeledSample s{"w", testutil::random_image(1200, 800, gen), testutil::random_mask(1200, 800, 3, gen)};
  const auto tiles = tile_dataset({s}, 800, 0.5);
  ASSERT_EQ(tiles.size(), 2u);
  EXPECT_EQ(tiles[0].image, crop(s.image, 0, 0, 800, 800));
  EXPECT_EQ(tiles[1].image, crop(s.image, 400, 0, 800, 800));
  EXPECT_EQ(tiles[1].mask, crop(s.mask, 400, 0, 800, 800));
}

TEST(TileDataset, MatchesStrideEnumerationOracle) {
  const auto expected = oracle::stride_positions(1000, 400, 200);
  EXPECT_EQ(expected, (std::vector<int>{0, 200, 400, 600}));
  EXPECT_EQ(tile_dataset({solid_sample("s", 1000, 1000, 0)}, 400, 0.5).size(), 16u);

  for (auto [w, h, t, ov] : {std::tuple{1000, 700, 300, 0.5}, {513, 257, 128, 0.25}, {90, 90, 40, 0.0}}) {
    const int stride = static_cast<int>(t * (1.0 - ov));
    const auto xs = oracle::stride_positions(w, t, stride);
    const auto ys = oracle::stride_positions(h, t, stride);
    EXPECT_EQ(tile_dataset({solid_sample("s", w, h, 0)}, t, ov).size(), xs.size() * ys.size());
  }
}

TEST(TileDataset, CoversEveryPixelAndInteriorTwice) {
  // Encode each pixel's coordinates in the image so tiles can be mapped back.
  const int w = 96, h = 64, t = 32;
  Image img = make_image(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(x);
      img.at(x, y, 1) = static_cast<std::uint8_t>(y);
    }
  const LabeledSample s{"c", img, make_mask(w, h)};
  const auto before = s;
  const auto tiles = tile_dataset({s}, t, 0.5);
  EXPECT_EQ(s.image, before.image);  // input untouched

  std::vector<int> hits(w * h, 0);
  for (const auto& tile : tiles)
    for (int y = 0; y < t; ++y)
      for (int x = 0; x < t; ++x) ++hits[tile.image.at(x, y, 1) * w + tile.image.at(x, y, 0)];
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ASSERT_GE(hits[y * w + x], 1);
      if (x >= t / 2 && x < w - t / 2 && y >= t / 2 && y < h - t / 2) {
        EXPECT_GE(hits[y * w + x], 4) << x << "," << y;
      }
    }
}

TEST(TileDataset, Errors) {
  EXPECT_THROW(tile_dataset({solid_sample("s", 100, 100, 0)}, 200, 0.5), DatasetError);
  EXPECT_THROW(tile_dataset({solid_sample("s", 100, 100, 0)}, 50, 1.0), DatasetError);
  EXPECT_THROW(tile_dataset({solid_sample("s", 100, 100, 0)}, 50, -0.1), DatasetError);
}

TEST(SaveSynthetic, RoundTripIsByteIdentical) {
  TempDir dir("save");
  std::mt19937_64 gen(3);
  SyntheticSample s;
  s.id = synthetic_id(42);
  s.stream_id = 42;
  s.seed = 9;
  s.scale = 2;
  s.image = testutil::random_image(40, 40, gen);
  s.mask = testutil::random_mask(40, 40, 256, gen);

  OutputManifest manifest;
  const auto row = save_synthetic(s, dir.path(), manifest);
  EXPECT_EQ(row.synthetic_id, "synthetic_000042");
  EXPECT_EQ(png::read_rgb(dir.path() / row.image_path), s.image);
  EXPECT_EQ(png::read_index(dir.path() / row.mask_path), s.mask);
  EXPECT_FALSE(fs::exists(dir.path() / (row.image_path + ".tmp")));

  manifest.write(dir.path() / "manifest.tsv");
  EXPECT_EQ(oracle::slurp(dir.path() / "manifest.tsv"),
            "synthetic_000042\tsynthetic_000042_image.png\tsynthetic_000042_mask.png\t9\t2\n");
}

TEST(SaveSynthetic, ManifestKeepsGenerationOrder) {
  TempDir dir("order");
  OutputManifest manifest;
  // appended out of order, as parallel workers would
  for (int i = 999; i >= 0; --i) {
    SyntheticSample s;
    s.id = synthetic_id(i);
    s.stream_id = i;
    s.image = make_image(2, 2);
    s.mask = make_mask(2, 2);
    save_synthetic(s, dir.path(), manifest);
  }
  manifest.write(dir.path() / "manifest.tsv");
  const auto back = OutputManifest::read(dir.path() / "manifest.tsv");
  ASSERT_EQ(back.size(), 1000u);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back.rows()[i].synthetic_id, synthetic_id(i));
}

TEST(SaveSynthetic, UnwritableDirectoryFails) {
  SyntheticSample s;
  s.id = "x";
  s.image = make_image(2, 2);
  s.mask = make_mask(2, 2);
  EXPECT_THROW(save_synthetic(s, "/nonexistent/dir/for/chessmix"), GenerationError);
}

TEST(WriteDataset, TilesReloadThroughManifest) {
  TempDir dir("tiles");
  std::mt19937_64 gen(4);
  LabeledSample s{"p", testutil::random_image(60, 40, gen), testutil::random_mask(60, 40, 4, gen)};
  const auto tiles = tile_dataset({s}, 40, 0.5);
  const auto manifest = write_dataset(tiles, dir.path() / "out", 4, 255);
  const auto ds = load_dataset(manifest);
  ASSERT_EQ(ds.samples.size(), tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    EXPECT_EQ(ds.samples[i].id, tiles[i].id);
    EXPECT_EQ(ds.samples[i].image, tiles[i].image);
    EXPECT_EQ(ds.samples[i].mask, tiles[i].mask);
  }
}
