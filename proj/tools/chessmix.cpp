// chessmix command-line driver: generate, report, index, tile, toy.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chessmix/chessmix.hpp"
#include "chessmix/toy_dataset.hpp"

namespace {

using namespace chessmix;

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    T v{};
    if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError(std::string("bad ") + what + " list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

/// Reads a flat key=value file into `--key=value` arguments. Underscores in
/// keys map to dashes so `grid_steps` and `grid-steps` name the same flag.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    auto key = line.substr(start, eq - start);
    auto value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    value.erase(0, value.find_first_not_of(" \t"));
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

/// Splices config-file arguments in front of the subcommand's own arguments,
/// so explicit flags (parsed later) win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config.empty()) return args;
  if (args.empty()) throw ConfigError("--config requires a subcommand");
  auto extra = config_arguments(config);
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chessmix: chessboard mini-patch augmentation for semantic segmentation"};
  app.require_subcommand(1);

  // generate
  GenerationConfig cfg;
  std::string preset, scales_text = "1,2", probs_text = "0.5,0.5";
  int image_side = cfg.image_side, patch_side = cfg.base_patch_side, ignore = -1;
  auto* gen = app.add_subcommand("generate", "Synthesize chessboard image/mask pairs");
  gen->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  gen->add_option("--manifest", cfg.manifest_path, "Input dataset manifest")->required();
  gen->add_option("--out", cfg.out_dir, "Output directory")->required();
  gen->add_option("--count", cfg.count, "Number of synthetic images");
  gen->add_option("--preset", preset, "vaihingen (800/200) or thetford (400/100)");
  auto* side_opt = gen->add_option("--image-side", image_side, "Synthetic image side in pixels");
  auto* patch_opt = gen->add_option("--patch-side", patch_side, "Scale-1 mini-patch side in pixels");
  gen->add_option("--scales", scales_text, "Comma-separated scale multipliers");
  gen->add_option("--scale-probs", probs_text, "Comma-separated scale probabilities");
  gen->add_flag("--mirror", cfg.mirror, "Mirror filled cells into empty image cells");
  gen->add_option("--seed", cfg.seed, "Master seed");
  gen->add_option("--jobs", cfg.jobs, "Worker threads");
  gen->add_flag("--audit", cfg.audit, "Write per-cell provenance to audit.tsv");
  gen->add_option("--ignore", ignore, "Override the ignore index");
  auto& tp = cfg.transforms;
  gen->add_option("--grid-steps", tp.grid_steps, "Grid distortion cells per axis");
  gen->add_option("--grid-limit", tp.grid_limit, "Max grid cell scale deviation");
  gen->add_option("--perspective-limit", tp.perspective_limit, "Max corner offset as a fraction of the side");
  gen->add_option("--p-vflip", tp.p_vflip, "Vertical flip probability");
  gen->add_option("--p-hflip", tp.p_hflip, "Horizontal flip probability");
  gen->add_option("--p-rot90", tp.p_rot90, "Probability of a random 90 degree rotation");
  gen->add_option("--p-transpose", tp.p_transpose, "Transpose probability");
  gen->add_option("--p-distortion", tp.p_distortion, "Probability of drawing a distortion");
  gen->add_option("--p-distortion-apply", tp.p_distortion_apply, "Probability a drawn distortion is applied");

  // report
  std::string report_dir, report_manifest;
  auto* rep = app.add_subcommand("report", "Class balance of a generated directory");
  rep->add_option("--dir", report_dir, "Generated output directory")->required();
  rep->add_option("--manifest", report_manifest, "Source manifest (defaults to stored stats)");

  // index
  std::string index_manifest, index_dump, index_scales = "1,2";
  int index_patch = 200;
  auto* idx = app.add_subcommand("index", "Build the weighted patch index and optionally dump it");
  idx->add_option("--manifest", index_manifest)->required();
  idx->add_option("--patch-side", index_patch);
  idx->add_option("--scales", index_scales);
  idx->add_option("--dump", index_dump, "Write sample_id/x/y/side/weight rows here");

  // tile
  std::string tile_manifest, tile_out;
  int tile_size = 800;
  double tile_overlap = 0.5;
  auto* tile = app.add_subcommand("tile", "Crop a dataset into overlapping square tiles");
  tile->add_option("--manifest", tile_manifest)->required();
  tile->add_option("--out", tile_out)->required();
  tile->add_option("--tile", tile_size);
  tile->add_option("--overlap", tile_overlap);

  // toy
  std::string toy_out, toy_shares = "0.5,0.4,0.1";
  int toy_count = 4, toy_side = 400, toy_block = 20;
  std::uint64_t toy_seed = 7;
  auto* toy = app.add_subcommand("toy", "Write a procedural labeled dataset");
  toy->add_option("--out", toy_out)->required();
  toy->add_option("--count", toy_count);
  toy->add_option("--side", toy_side);
  toy->add_option("--block", toy_block);
  toy->add_option("--shares", toy_shares);
  toy->add_option("--seed", toy_seed);

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::config);
  } catch (const chessmix::Error& e) {
    std::cerr << "chessmix: " << e.what() << '\n';
    return e.exit_code();
  }

  try {
    if (*gen) {
      if (!preset.empty()) cfg.apply_preset(preset);
      if (side_opt->count() > 0) cfg.image_side = image_side;
      if (patch_opt->count() > 0) cfg.base_patch_side = patch_side;
      cfg.scales = parse_list<int>(scales_text, "scale");
      cfg.scale_probabilities = parse_list<double>(probs_text, "probability");
      if (ignore >= 0) cfg.ignore_index = ignore;
      const auto result = run_generate(cfg, [](std::size_t done, std::size_t total) {
        if (done % 100 == 0 || done == total) std::cerr << "generated " << done << "/" << total << '\n';
      });
      result.report.write(std::cerr);
      std::cout << result.manifest_path.string() << '\n';
    } else if (*rep) {
      std::optional<fs::path> src;
      if (!report_manifest.empty()) src = report_manifest;
      run_report(report_dir, src).write(std::cout);
    } else if (*idx) {
      const auto ds = load_dataset(index_manifest);
      const auto stats = compute_class_stats(ds.samples, ds.manifest.class_count, ds.manifest.ignore_index);
      const auto index = build_index(ds.samples, stats, index_patch, parse_list<int>(index_scales, "scale"));
      for (int c : stats.absent_classes()) std::cerr << "class " << c << " has no pixels; excluded from weights\n";
      for (const auto& l : summarize(index))
        std::cerr << "scale " << l.scale << " side " << l.side << ": " << l.patches << " patches, " << l.positive
                  << " positive, total weight " << l.total_weight << '\n';
      if (!index_dump.empty()) {
        std::ofstream out(index_dump, std::ios::binary);
        if (!out) throw GenerationError("cannot write '" + index_dump + "'");
        dump_index(out, index, ds.samples);
        std::cout << index_dump << '\n';
      }
    } else if (*tile) {
      const auto ds = load_dataset(tile_manifest);
      const auto tiles = tile_dataset(ds.samples, tile_size, tile_overlap);
      std::cerr << tiles.size() << " tiles\n";
      std::cout << write_dataset(tiles, tile_out, ds.manifest.class_count, ds.manifest.ignore_index).string() << '\n';
    } else if (*toy) {
      const auto shares = parse_list<double>(toy_shares, "share");
      const auto samples = make_toy_dataset(toy_count, toy_side, toy_block, shares, toy_seed);
      std::cout << write_dataset(samples, toy_out, static_cast<int>(shares.size()), kDefaultIgnoreIndex).string()
                << '\n';
    }
  } catch (const chessmix::Error& e) {
    std::cerr << "chessmix: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "chessmix: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::generation);
  }
  return 0;
}
