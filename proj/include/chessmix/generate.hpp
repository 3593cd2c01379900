#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chessmix/composer.hpp"
#include "chessmix/dataset_io.hpp"
#include "chessmix/error.hpp"
#include "chessmix/sampler.hpp"
#include "chessmix/stats_index.hpp"
#include "chessmix/transforms.hpp"

namespace chessmix {

struct GenerationConfig {
  fs::path manifest_path;
  fs::path out_dir;
  int count = 1000;
  int image_side = 800;
  int base_patch_side = 200;
  std::vector<int> scales{1, 2};
  std::vector<double> scale_probabilities{0.5, 0.5};
  bool mirror = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool audit = false;
  std::optional<int> ignore_index;  // overrides the manifest header when set
  TransformParams transforms;

  /// Named (image_side, base_patch_side) setups: "vaihingen" 800/200 and
  /// "thetford" 400/100.
  void apply_preset(const std::string& name) {
    if (name == "vaihingen") {
      image_side = 800;
      base_patch_side = 200;
    } else if (name == "thetford" || name == "coffee") {
      image_side = 400;
      base_patch_side = 100;
    } else {
      throw ConfigError("unknown preset '" + name + "'");
    }
  }

  SamplingConfig sampling() const { return {scale_probabilities, mirror}; }

  void validate() const {
    if (count < 1) throw ConfigError("count must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (base_patch_side <= 0 || base_patch_side % 2 != 0)
      throw ConfigError("patch side must be positive and even");
    if (scales.empty()) throw ConfigError("at least one scale is required");
    if (scales.size() != scale_probabilities.size())
      throw ConfigError("scales and scale probabilities differ in length");
    for (int s : scales)
      if (s <= 0) throw ConfigError("scales must be positive");
    const int max_scale = *std::max_element(scales.begin(), scales.end());
    if (image_side <= 0 || image_side % (base_patch_side * max_scale) != 0)
      throw ConfigError("image side " + std::to_string(image_side) + " must be a multiple of patch side x max scale (" +
                        std::to_string(base_patch_side * max_scale) + ")");
    if (ignore_index && (*ignore_index < 0 || *ignore_index > 255))
      throw ConfigError("ignore index must lie in [0, 255]");
    sampling().validate();
    transforms.validate();
  }
};

struct LevelSummary {
  int scale = 1;
  int side = 0;
  std::size_t patches = 0;
  std::size_t positive = 0;
  double total_weight = 0.0;
};

inline std::vector<LevelSummary> summarize(const PatchIndex& index) {
  std::vector<LevelSummary> out;
  for (const auto& l : index.levels) {
    LevelSummary s{l.scale, l.side, l.patches.size(), 0, l.total()};
    for (const auto& p : l.patches) s.positive += p.weight > 0.0;
    out.push_back(s);
  }
  return out;
}

/// Source vs generated class shares over non-ignore pixels.
struct BalanceReport {
  int class_count = 0;
  std::uint8_t ignore_index = kDefaultIgnoreIndex;
  std::vector<std::uint64_t> source_counts;
  std::vector<std::uint64_t> generated_counts;
  std::vector<double> source_pct;
  std::vector<double> generated_pct;
  std::vector<double> ratio;  // generated / source, NaN where the class is absent from the source
  std::vector<int> decreased;
  std::vector<LevelSummary> levels;
  std::size_t images = 0;

  void write(std::ostream& out) const {
    char buf[160];
    out << "images\t" << images << '\n';
    out << "class\tsource_pixels\tsource_share\tgenerated_pixels\tgenerated_share\tratio\n";
    for (int i = 0; i < class_count; ++i) {
      std::snprintf(buf, sizeof(buf), "%d\t%llu\t%.6f\t%llu\t%.6f\t", i,
                    static_cast<unsigned long long>(source_counts[i]), source_pct[i],
                    static_cast<unsigned long long>(generated_counts[i]), generated_pct[i]);
      out << buf;
      if (std::isnan(ratio[i])) {
        out << "n/a (absent from source, excluded from weighting)";
      } else {
        std::snprintf(buf, sizeof(buf), "%.4f", ratio[i]);
        out << buf;
        if (std::find(decreased.begin(), decreased.end(), i) != decreased.end()) out << "\tDECREASED";
      }
      out << '\n';
    }
    out << "scale\tside\tpatches\tpositive\ttotal_weight\n";
    for (const auto& l : levels) {
      std::snprintf(buf, sizeof(buf), "%d\t%d\t%zu\t%zu\t%.17g\n", l.scale, l.side, l.patches, l.positive,
                    l.total_weight);
      out << buf;
    }
  }
};

inline std::vector<double> shares(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0)
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
  return out;
}

inline BalanceReport make_report(std::vector<std::uint64_t> source_counts, std::vector<std::uint64_t> generated_counts,
                                 std::uint8_t ignore_index, std::vector<LevelSummary> levels, std::size_t images) {
  if (source_counts.size() != generated_counts.size()) throw DatasetError("class count mismatch in report");
  BalanceReport r;
  r.class_count = static_cast<int>(source_counts.size());
  r.ignore_index = ignore_index;
  r.source_pct = shares(source_counts);
  r.generated_pct = shares(generated_counts);
  r.source_counts = std::move(source_counts);
  r.generated_counts = std::move(generated_counts);
  r.levels = std::move(levels);
  r.images = images;
  for (int i = 0; i < r.class_count; ++i) {
    const double ratio = r.source_pct[i] > 0.0 ? r.generated_pct[i] / r.source_pct[i] : std::nan("");
    r.ratio.push_back(ratio);
    if (!std::isnan(ratio) && ratio < 1.0) r.decreased.push_back(i);
  }
  return r;
}

/// Non-ignore class pixel counts of a mask; values >= class_count are ignored.
inline void accumulate_counts(const Mask& mask, std::uint8_t ignore_index, std::vector<std::uint64_t>& counts) {
  for (auto v : mask.data())
    if (v != ignore_index && v < counts.size()) ++counts[v];
}

namespace detail {

inline constexpr const char* kSourceStatsFile = "source_stats.tsv";
inline constexpr const char* kManifestFile = "manifest.tsv";
inline constexpr const char* kReportFile = "report.txt";
inline constexpr const char* kAuditFile = "audit.tsv";
inline constexpr const char* kClassTableFile = "classes.tsv";

inline void write_source_stats(const fs::path& path, const ClassStats& stats, const std::vector<LevelSummary>& levels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GenerationError("cannot write '" + path.string() + "'");
  out << "classes=" << stats.class_count << " ignore=" << int(stats.ignore_index) << '\n';
  for (int i = 0; i < stats.class_count; ++i) out << "class\t" << i << '\t' << stats.counts[i] << '\n';
  char buf[64];
  for (const auto& l : levels) {
    std::snprintf(buf, sizeof(buf), "%.17g", l.total_weight);
    out << "level\t" << l.scale << '\t' << l.side << '\t' << l.patches << '\t' << l.positive << '\t' << buf << '\n';
  }
}

struct SourceStatsFile {
  int class_count = 0;
  std::uint8_t ignore_index = kDefaultIgnoreIndex;
  std::vector<std::uint64_t> counts;
  std::vector<LevelSummary> levels;
};

inline SourceStatsFile read_source_stats(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path.string() + "'");
  SourceStatsFile s;
  std::string line;
  std::getline(in, line);
  int classes = 0, ignore = 0;
  if (std::sscanf(line.c_str(), "classes=%d ignore=%d", &classes, &ignore) != 2 || classes <= 0)
    throw DatasetError("bad header in '" + path.string() + "'");
  s.class_count = classes;
  s.ignore_index = static_cast<std::uint8_t>(ignore);
  s.counts.assign(classes, 0);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "class") {
      int i = 0;
      std::uint64_t c = 0;
      if (!(ls >> i >> c) || i < 0 || i >= classes) throw DatasetError("bad class row in '" + path.string() + "'");
      s.counts[i] = c;
    } else if (kind == "level") {
      LevelSummary l;
      if (!(ls >> l.scale >> l.side >> l.patches >> l.positive >> l.total_weight))
        throw DatasetError("bad level row in '" + path.string() + "'");
      s.levels.push_back(l);
    }
  }
  return s;
}

inline void write_class_table(const fs::path& path, int class_count) {
  // visualization palette only; masks themselves store raw indices
  static constexpr std::uint8_t kPalette[][3] = {{255, 255, 255}, {0, 0, 255},   {0, 255, 255}, {0, 255, 0},
                                                 {255, 255, 0},   {255, 0, 0},   {255, 0, 255}, {128, 128, 128},
                                                 {128, 0, 0},     {0, 128, 0},   {0, 0, 128},   {128, 128, 0}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GenerationError("cannot write '" + path.string() + "'");
  out << "index\tname\tr\tg\tb\n";
  for (int i = 0; i < class_count; ++i) {
    const auto& c = kPalette[i % std::size(kPalette)];
    out << i << "\tclass_" << i << '\t' << int(c[0]) << '\t' << int(c[1]) << '\t' << int(c[2]) << '\n';
  }
}

}  // namespace detail

struct GenerationResult {
  fs::path manifest_path;
  OutputManifest manifest;
  BalanceReport report;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// One synthetic image for stream `stream_id`: scale draw, layout, compose.
inline SyntheticSample generate_one(std::uint64_t seed, std::uint64_t stream_id, const GenerationConfig& config,
                                    const PatchIndex& index, const std::vector<LabeledSample>& samples,
                                    std::uint8_t ignore_index) {
  RngStream rng(seed, stream_id);
  const auto sampling = config.sampling();
  const auto ordinal = choose_scale(rng, sampling);
  const int scale = config.scales[ordinal];
  const auto layout = make_layout(config.image_side, config.base_patch_side * scale);
  return compose(rng, layout, index, samples, sampling, config.transforms, ignore_index);
}

/// Full generation loop over stream ids 0..count-1 on `jobs` workers. Output
/// bytes do not depend on the worker count. On failure every file written by
/// this call is removed and a GenerationError names the failing stream.
inline GenerationResult run_generate(const GenerationConfig& config, const ProgressFn& progress = {}) {
  config.validate();
  auto ds = load_dataset(config.manifest_path);
  if (config.ignore_index) {
    ds.manifest.ignore_index = static_cast<std::uint8_t>(*config.ignore_index);
    if (ds.manifest.ignore_index < ds.manifest.class_count)
      throw ConfigError("ignore index lies inside the class range");
    for (const auto& s : ds.samples) validate_sample(s, ds.manifest.class_count, ds.manifest.ignore_index);
  }
  const auto ignore = ds.manifest.ignore_index;
  const int classes = ds.manifest.class_count;
  const auto stats = compute_class_stats(ds.samples, classes, ignore);
  const auto index = build_index(ds.samples, stats, config.base_patch_side, config.scales);

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw GenerationError("cannot create '" + config.out_dir.string() + "': " + ec.message());

  struct Slot {
    OutputRow row;
    std::vector<std::uint64_t> counts;
    std::vector<CellProvenance> provenance;
    bool done = false;
  };
  const auto total = static_cast<std::size_t>(config.count);
  std::vector<Slot> slots(total);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::optional<std::pair<std::size_t, std::string>> first_error;
  std::mutex progress_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t id = next.fetch_add(1);
      if (id >= total) break;
      try {
        auto sample = generate_one(config.seed, id, config, index, ds.samples, ignore);
        Slot& slot = slots[id];
        slot.counts.assign(classes, 0);
        accumulate_counts(sample.mask, ignore, slot.counts);
        slot.row = save_synthetic(sample, config.out_dir);
        if (config.audit) slot.provenance = std::move(sample.provenance);
        slot.done = true;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (!first_error || id < first_error->first) first_error = {id, e.what()};
        failed = true;
      }
      const auto n = finished.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(n, total);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int jobs = std::min<int>(config.jobs, config.count);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  if (first_error) {
    for (const auto& s : slots)
      if (s.done) {
        fs::remove(config.out_dir / s.row.image_path, ec);
        fs::remove(config.out_dir / s.row.mask_path, ec);
      }
    throw GenerationError("stream " + std::to_string(first_error->first) + ": " + first_error->second);
  }

  GenerationResult result;
  std::vector<std::uint64_t> generated(classes, 0);
  for (auto& s : slots) {
    result.manifest.append(s.row);
    for (int i = 0; i < classes; ++i) generated[i] += s.counts[i];
  }
  result.manifest_path = config.out_dir / detail::kManifestFile;
  result.manifest.write(result.manifest_path);

  const auto levels = summarize(index);
  detail::write_source_stats(config.out_dir / detail::kSourceStatsFile, stats, levels);
  detail::write_class_table(config.out_dir / detail::kClassTableFile, classes);
  if (config.audit) {
    std::ofstream audit(config.out_dir / detail::kAuditFile, std::ios::binary);
    audit << "stream_id\tsynthetic_id\trow\tcol\tsample_id\tx\ty\tside\tscale\ttransform\n";
    for (std::size_t id = 0; id < total; ++id)
      for (const auto& p : slots[id].provenance)
        audit << id << '\t' << slots[id].row.synthetic_id << '\t' << p.row << '\t' << p.col << '\t' << p.sample_id
              << '\t' << p.x << '\t' << p.y << '\t' << p.side << '\t' << p.scale << '\t' << p.transform << '\n';
  }

  result.report = make_report(stats.counts, std::move(generated), ignore, levels, total);
  std::ofstream rep(config.out_dir / detail::kReportFile, std::ios::binary);
  result.report.write(rep);
  return result;
}

/// Rescans the generated masks listed in `dir`'s manifest. Source counts come
/// from `source_manifest` when given, else from the stats stored at
/// generation time.
inline BalanceReport run_report(const fs::path& dir, const std::optional<fs::path>& source_manifest = std::nullopt) {
  const auto manifest_path = dir / detail::kManifestFile;
  if (!fs::exists(manifest_path)) throw DatasetError("no output manifest in '" + dir.string() + "'");
  const auto manifest = OutputManifest::read(manifest_path);
  if (manifest.size() == 0) throw DatasetError("'" + dir.string() + "' contains no generated samples");

  detail::SourceStatsFile src;
  if (source_manifest) {
    const auto ds = load_dataset(*source_manifest);
    const auto stats = compute_class_stats(ds.samples, ds.manifest.class_count, ds.manifest.ignore_index);
    src.class_count = stats.class_count;
    src.ignore_index = stats.ignore_index;
    src.counts = stats.counts;
    if (fs::exists(dir / detail::kSourceStatsFile)) src.levels = detail::read_source_stats(dir / detail::kSourceStatsFile).levels;
  } else {
    src = detail::read_source_stats(dir / detail::kSourceStatsFile);
  }

  std::vector<std::uint64_t> generated(src.class_count, 0);
  for (const auto& row : manifest.rows()) {
    const auto mask = png::read_index(dir / row.mask_path);
    accumulate_counts(mask, src.ignore_index, generated);
  }
  auto report = make_report(src.counts, std::move(generated), src.ignore_index, src.levels, manifest.size());
  std::ofstream rep(dir / detail::kReportFile, std::ios::binary);
  report.write(rep);
  return report;
}

}  // namespace chessmix
