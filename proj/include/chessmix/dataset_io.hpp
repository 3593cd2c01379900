#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chessmix/error.hpp"
#include "chessmix/png_io.hpp"
#include "chessmix/positions.hpp"
#include "chessmix/sample.hpp"

namespace chessmix {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string id;
  fs::path image_path;
  fs::path mask_path;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  int class_count = 0;
  std::uint8_t ignore_index = kDefaultIgnoreIndex;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledSample> samples;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  return s;
}

inline int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DatasetError("invalid " + what + " '" + s + "'");
  }
}

}  // namespace detail

/// Parses an input manifest: optional header `classes=N ignore=K`, then one
/// `id<TAB>image_path<TAB>mask_path` per line. Relative paths resolve against
/// the manifest's directory. class_count is 0 when not declared.
inline DatasetManifest parse_manifest(std::istream& in, const fs::path& base_dir) {
  DatasetManifest m;
  std::set<std::string> ids;
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::rstrip(line);
    if (line.empty() || line[0] == '#') continue;
    if (first && line.find('\t') == std::string::npos && line.find('=') != std::string::npos) {
      first = false;
      std::istringstream hs(line);
      std::string tok;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw DatasetError("bad manifest header token '" + tok + "'");
        const auto key = tok.substr(0, eq);
        const int value = detail::parse_int(tok.substr(eq + 1), key);
        if (key == "classes") {
          if (value <= 0 || value > 256) throw DatasetError("classes must be in [1, 256]");
          m.class_count = value;
        } else if (key == "ignore") {
          if (value < 0 || value > 255) throw DatasetError("ignore must be in [0, 255]");
          m.ignore_index = static_cast<std::uint8_t>(value);
        } else {
          throw DatasetError("unknown manifest header key '" + key + "'");
        }
      }
      continue;
    }
    first = false;
    auto cols = detail::split_tabs(line);
    if (cols.size() != 3)
      throw DatasetError("manifest line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
    if (!ids.insert(cols[0]).second) throw DatasetError("duplicate sample id '" + cols[0] + "'");
    auto resolve = [&](const std::string& p) {
      fs::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    m.entries.push_back({cols[0], resolve(cols[1]), resolve(cols[2])});
  }
  if (m.entries.empty()) throw DatasetError("manifest has no entries");
  if (m.class_count > 0 && m.ignore_index < m.class_count)
    throw DatasetError("ignore index " + std::to_string(m.ignore_index) + " lies inside [0, classes)");
  return m;
}

/// Checks dimension agreement and mask value range for one sample.
inline void validate_sample(const LabeledSample& s, int class_count, std::uint8_t ignore_index) {
  if (s.image.width() != s.mask.width() || s.image.height() != s.mask.height())
    throw DatasetError("sample '" + s.id + "': image is " + std::to_string(s.image.width()) + "x" +
                       std::to_string(s.image.height()) + " but mask is " + std::to_string(s.mask.width()) +
                       "x" + std::to_string(s.mask.height()));
  if (s.image.channels() != 3 || s.mask.channels() != 1)
    throw DatasetError("sample '" + s.id + "': expected RGB image and single-channel mask");
  for (auto v : s.mask.data())
    if (v >= class_count && v != ignore_index)
      throw DatasetError("sample '" + s.id + "': mask value " + std::to_string(v) + " outside [0, " +
                         std::to_string(class_count) + ") and not the ignore index");
}

inline Dataset load_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DatasetError("cannot open manifest '" + manifest_path.string() + "'");
  Dataset ds;
  ds.manifest = parse_manifest(in, manifest_path.parent_path());
  auto& m = ds.manifest;

  int max_seen = -1;
  for (const auto& e : m.entries) {
    for (const auto& p : {e.image_path, e.mask_path})
      if (!fs::exists(p)) throw DatasetError("missing file '" + p.string() + "'");
    LabeledSample s{e.id, png::read_rgb(e.image_path), png::read_index(e.mask_path)};
    for (auto v : s.mask.data())
      if (v != m.ignore_index) max_seen = std::max<int>(max_seen, v);
    ds.samples.push_back(std::move(s));
  }
  if (m.class_count == 0) {
    if (max_seen < 0) throw DatasetError("cannot infer class count: every mask pixel is ignore");
    m.class_count = max_seen + 1;
    if (m.ignore_index < m.class_count)
      throw DatasetError("inferred class count " + std::to_string(m.class_count) +
                         " overlaps the ignore index");
  }
  for (const auto& s : ds.samples) validate_sample(s, m.class_count, m.ignore_index);
  return ds;
}

/// Crops every sample into tile_size squares at stride
/// floor(tile_size * (1 - overlap_fraction)), adding edge-flush tiles so
/// every pixel is covered. Tile ids are `<parent>_t<row>_<col>`.
inline std::vector<LabeledSample> tile_dataset(const std::vector<LabeledSample>& samples, int tile_size,
                                               double overlap_fraction) {
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
    throw DatasetError("overlap fraction must lie in [0, 1)");
  if (tile_size <= 0) throw DatasetError("tile size must be positive");
  const int stride = std::max(1, static_cast<int>(std::floor(tile_size * (1.0 - overlap_fraction))));
  std::vector<LabeledSample> out;
  for (const auto& s : samples) {
    if (tile_size > s.image.width() || tile_size > s.image.height())
      throw DatasetError("tile size " + std::to_string(tile_size) + " exceeds sample '" + s.id + "'");
    const auto xs = sliding_offsets(s.image.width(), tile_size, stride);
    const auto ys = sliding_offsets(s.image.height(), tile_size, stride);
    for (std::size_t r = 0; r < ys.size(); ++r)
      for (std::size_t c = 0; c < xs.size(); ++c)
        out.push_back({s.id + "_t" + std::to_string(r) + "_" + std::to_string(c),
                       crop(s.image, xs[c], ys[r], tile_size, tile_size),
                       crop(s.mask, xs[c], ys[r], tile_size, tile_size)});
  }
  return out;
}

/// Writes samples as PNG pairs plus an input manifest that load_dataset accepts.
inline fs::path write_dataset(const std::vector<LabeledSample>& samples, const fs::path& out_dir,
                              int class_count, std::uint8_t ignore_index) {
  fs::create_directories(out_dir);
  const auto manifest = out_dir / "manifest.tsv";
  std::ofstream out(manifest);
  if (!out) throw GenerationError("cannot write '" + manifest.string() + "'");
  if (class_count > 0) out << "classes=" << class_count << " ignore=" << int(ignore_index) << '\n';
  for (const auto& s : samples) {
    const auto img = s.id + "_image.png";
    const auto msk = s.id + "_mask.png";
    png::write_rgb(out_dir / img, s.image);
    png::write_index(out_dir / msk, s.mask);
    out << s.id << '\t' << img << '\t' << msk << '\n';
  }
  if (!out) throw GenerationError("failed writing '" + manifest.string() + "'");
  return manifest;
}

// ---------------------------------------------------------------------------
// Synthetic output

struct OutputRow {
  std::string synthetic_id;
  std::string image_path;  // relative to the output directory
  std::string mask_path;
  std::uint64_t seed = 0;
  int scale = 1;
  std::uint64_t stream_id = 0;
};

/// Output manifest rows. Single writer; rows are emitted sorted by stream id.
class OutputManifest {
 public:
  void append(OutputRow row) { rows_.push_back(std::move(row)); }
  const std::vector<OutputRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  void write(const fs::path& path) const {
    auto sorted = rows_;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const OutputRow& a, const OutputRow& b) { return a.stream_id < b.stream_id; });
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw GenerationError("cannot write '" + tmp.string() + "'");
      for (const auto& r : sorted)
        out << r.synthetic_id << '\t' << r.image_path << '\t' << r.mask_path << '\t' << r.seed << '\t'
            << r.scale << '\n';
      if (!out) throw GenerationError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
  }

  static OutputManifest read(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open output manifest '" + path.string() + "'");
    OutputManifest m;
    std::string line;
    std::uint64_t ordinal = 0;
    while (std::getline(in, line)) {
      line = detail::rstrip(line);
      if (line.empty()) continue;
      auto cols = detail::split_tabs(line);
      if (cols.size() != 5) throw DatasetError("output manifest: expected 5 fields in '" + line + "'");
      OutputRow r{cols[0], cols[1], cols[2], 0, 1, ordinal++};
      try {
        r.seed = std::stoull(cols[3]);
        r.scale = std::stoi(cols[4]);
      } catch (const std::exception&) {
        throw DatasetError("output manifest: bad seed/scale in '" + line + "'");
      }
      m.append(std::move(r));
    }
    return m;
  }

 private:
  std::vector<OutputRow> rows_;
};

namespace detail {

template <typename WriteFn>
void write_then_rename(const fs::path& final_path, WriteFn&& write) {
  auto tmp = final_path;
  tmp += ".tmp";
  try {
    write(tmp);
    fs::rename(tmp, final_path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace detail

/// Writes the image (RGB) and mask (index) PNGs of a synthetic sample.
/// Each file is written to a temporary name and renamed into place.
inline OutputRow save_synthetic(const SyntheticSample& s, const fs::path& out_dir) {
  OutputRow row{s.id, s.id + "_image.png", s.id + "_mask.png", s.seed, s.scale, s.stream_id};
  detail::write_then_rename(out_dir / row.image_path, [&](const fs::path& p) { png::write_rgb(p, s.image); });
  try {
    detail::write_then_rename(out_dir / row.mask_path, [&](const fs::path& p) { png::write_index(p, s.mask); });
  } catch (...) {
    std::error_code ec;
    fs::remove(out_dir / row.image_path, ec);
    throw;
  }
  return row;
}

inline OutputRow save_synthetic(const SyntheticSample& s, const fs::path& out_dir, OutputManifest& manifest) {
  auto row = save_synthetic(s, out_dir);
  manifest.append(row);
  return row;
}

}  // namespace chessmix
