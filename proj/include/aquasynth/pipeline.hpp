#pragma once

// Batch RGB-D → underwater dataset construction.
//
// Every item (source image × water type) draws its parameters from its own
// random substream keyed by (master_seed, image_index, water_type), so the
// output bytes do not depend on worker count or completion order.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "ambient.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "image.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "record.hpp"
#include "rng.hpp"
#include "water_optics.hpp"

namespace aquasynth {

struct DatasetConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::vector<WaterType> water_types{kAllWaterTypes.begin(), kAllWaterTypes.end()};
  /// Types synthesized into their own subset but kept out of train/test.
  std::vector<WaterType> holdout_types{WaterType::C9};
  std::size_t images_per_type = 1000;
  std::size_t train_count = 700;
  std::size_t test_count = 300;
  Range depth_range{kDefaultMinSceneDepth, kDefaultMaxSceneDepth};
  Range surface_depth_range{0.0, kDefaultMaxSurfaceDepth};
  Range green_ambient_range{kGreenAmbientMin, kGreenAmbientMax};
  std::size_t target_width = 256;
  std::size_t target_height = 256;
  std::uint64_t master_seed = 0;
  bool augment = false;
  bool resample_clamped = false;
  ExportNormalization normalize_export = ExportNormalization::unit_interval;
  double depth_scale = kDefaultDepthScale;
  std::size_t workers = 1;
};

/// Throws ConfigError on the first violated constraint.
inline void validate(const DatasetConfig& cfg) {
  if (cfg.water_types.empty()) throw ConfigError("water_types is empty");
  for (std::size_t i = 0; i < cfg.water_types.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.water_types.size(); ++j) {
      if (cfg.water_types[i] == cfg.water_types[j]) {
        throw ConfigError("duplicate water type " + std::string(to_string(cfg.water_types[i])));
      }
    }
  }
  if (cfg.images_per_type == 0) throw ConfigError("images_per_type must be positive");
  if (cfg.train_count + cfg.test_count > cfg.images_per_type) {
    throw ConfigError("split train+test exceeds images_per_type");
  }
  const auto& d = cfg.depth_range;
  if (!(d.lo > 0.0 && d.lo < d.hi && std::isfinite(d.hi))) {
    throw ConfigError("depth_range must satisfy 0 < d_min < d_max");
  }
  const auto& D = cfg.surface_depth_range;
  if (!(D.lo >= 0.0 && D.lo <= D.hi && D.hi <= kDefaultMaxSurfaceDepth)) {
    throw ConfigError("D_range must lie within [0, 5]");
  }
  const auto& g = cfg.green_ambient_range;
  if (!(g.lo > 0.0 && g.lo <= g.hi && g.hi <= 1.0)) {
    throw ConfigError("Bg_range must lie within (0, 1]");
  }
  if (cfg.target_width == 0 || cfg.target_height == 0) throw ConfigError("target_size is zero");
  if (cfg.augment && cfg.target_width != cfg.target_height) {
    throw ConfigError("augmentation needs a square target_size");
  }
  if (!(cfg.depth_scale > 0.0)) throw ConfigError("depth_scale must be positive");
  if (cfg.workers == 0) throw ConfigError("workers must be at least 1");
}

namespace detail {

inline Range parse_range(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(key) + " must be a two-number array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<WaterType> parse_types(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(std::string(key) + " must be an array");
  std::vector<WaterType> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(std::string(key) + " entries must be strings");
    auto t = parse_water_type(v.get<std::string>());
    if (!t) throw ConfigError("unknown water type '" + v.get<std::string>() + "'");
    out.push_back(*t);
  }
  return out;
}

}  // namespace detail

/// Reads a config object whose keys mirror DatasetConfig. Missing keys keep
/// their defaults; unknown keys are rejected.
inline DatasetConfig parse_dataset_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  DatasetConfig cfg;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "input_dir") {
        cfg.input_dir = v.get<std::string>();
      } else if (key == "output_dir") {
        cfg.output_dir = v.get<std::string>();
      } else if (key == "water_types") {
        cfg.water_types = detail::parse_types(v, "water_types");
      } else if (key == "holdout_types") {
        cfg.holdout_types = detail::parse_types(v, "holdout_types");
      } else if (key == "images_per_type") {
        cfg.images_per_type = v.get<std::size_t>();
      } else if (key == "split") {
        cfg.train_count = v.at("train").get<std::size_t>();
        cfg.test_count = v.at("test").get<std::size_t>();
      } else if (key == "depth_range") {
        cfg.depth_range = detail::parse_range(v, "depth_range");
      } else if (key == "D_range") {
        cfg.surface_depth_range = detail::parse_range(v, "D_range");
      } else if (key == "Bg_range") {
        cfg.green_ambient_range = detail::parse_range(v, "Bg_range");
      } else if (key == "target_size") {
        if (v.is_number()) {
          cfg.target_width = cfg.target_height = v.get<std::size_t>();
        } else {
          cfg.target_width = v.at(0).get<std::size_t>();
          cfg.target_height = v.at(1).get<std::size_t>();
        }
      } else if (key == "master_seed") {
        cfg.master_seed = v.get<std::uint64_t>();
      } else if (key == "augment") {
        cfg.augment = v.get<bool>();
      } else if (key == "resample_clamped") {
        cfg.resample_clamped = v.get<bool>();
      } else if (key == "normalize_export") {
        const auto s = v.get<std::string>();
        if (s == "unit-interval") {
          cfg.normalize_export = ExportNormalization::unit_interval;
        } else if (s == "symmetric-unit") {
          cfg.normalize_export = ExportNormalization::symmetric_unit;
        } else {
          throw ConfigError("normalize_export must be unit-interval or symmetric-unit");
        }
      } else if (key == "depth_scale") {
        cfg.depth_scale = v.get<double>();
      } else if (key == "workers") {
        cfg.workers = v.get<std::size_t>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline DatasetConfig load_dataset_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_dataset_config(j);
}

/// Per-image affine map of the raw depth extent onto [d_min, d_max].
inline DepthMap rescale_depth(const DepthMap& raw, double d_min, double d_max) {
  if (raw.empty()) throw DegenerateDepth("empty depth map");
  const auto values = raw.values();
  for (double v : values) {
    if (!std::isfinite(v)) throw DegenerateDepth("non-finite raw depth");
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) throw DegenerateDepth("constant raw depth " + std::to_string(lo));

  const double scale = (d_max - d_min) / (hi - lo);
  DepthMap out(raw.width(), raw.height());
  auto dst = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    // Pin the extremes so the range is hit exactly.
    if (values[i] == lo) {
      dst[i] = d_min;
    } else if (values[i] == hi) {
      dst[i] = d_max;
    } else {
      dst[i] = std::clamp(d_min + (values[i] - lo) * scale, d_min, d_max);
    }
  }
  return out;
}

inline RngStream item_stream(std::uint64_t master_seed, std::uint64_t image_index, WaterType t) {
  return RngStream(derive_seed({master_seed, image_index, static_cast<std::uint64_t>(t)}));
}

/// Draws D and B_g from the item's substream (first two draws).
inline SynthesisParams sample_params(RngStream& stream, WaterType water_type,
                                     const DatasetConfig& cfg) {
  SynthesisParams p;
  p.water_type = water_type;
  p.surface_depth = stream.uniform(cfg.surface_depth_range.lo, cfg.surface_depth_range.hi);
  p.green_ambient = stream.uniform(cfg.green_ambient_range.lo, cfg.green_ambient_range.hi);
  p.min_scene_depth = cfg.depth_range.lo;
  p.max_scene_depth = cfg.depth_range.hi;
  p.seed = stream.seed();
  return p;
}

inline SynthesisParams sample_params(std::uint64_t master_seed, std::uint64_t image_index,
                                     WaterType water_type, const DatasetConfig& cfg) {
  RngStream stream = item_stream(master_seed, image_index, water_type);
  return sample_params(stream, water_type, cfg);
}

/// Ids that have both `<id>.png` and `<id>.depth.png` / `<id>.depth.pgm`,
/// sorted.
inline std::vector<std::string> list_sources(const std::filesystem::path& input_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir)) throw ConfigError("input_dir " + input_dir.string() + " missing");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() <= 4 || name.ends_with(".depth.png") || !name.ends_with(".png")) continue;
    const std::string id = name.substr(0, name.size() - 4);
    if (fs::exists(input_dir / (id + ".depth.png")) || fs::exists(input_dir / (id + ".depth.pgm"))) {
      ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::filesystem::path depth_file_for(const std::filesystem::path& input_dir,
                                            const std::string& id) {
  auto png = input_dir / (id + ".depth.png");
  if (std::filesystem::exists(png)) return png;
  return input_dir / (id + ".depth.pgm");
}

namespace detail {
inline bool contains(const std::vector<WaterType>& v, WaterType t) {
  return std::find(v.begin(), v.end(), t) != v.end();
}
inline constexpr std::uint64_t kSelectionKey = 0x53454C454354ULL;
inline constexpr int kMaxAmbientResamples = 16;
}  // namespace detail

/// Decides every item of the dataset without touching pixels: which sources
/// are used, their split, parameters, augmentation and output paths.
/// `source_ids` must be sorted; position in it is the image index.
inline std::vector<SynthesisRecord> plan_dataset(const DatasetConfig& cfg,
                                                 const std::vector<std::string>& source_ids,
                                                 const CoefficientTable& table) {
  validate(cfg);
  if (source_ids.size() < cfg.images_per_type) {
    throw ConfigError("need " + std::to_string(cfg.images_per_type) + " sources, found " +
                      std::to_string(source_ids.size()));
  }

  std::vector<std::size_t> order(source_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream selector(derive_seed({cfg.master_seed, detail::kSelectionKey}));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[selector.below(i)]);
  }
  order.resize(cfg.images_per_type);

  constexpr std::array<Augmentation, 5> kAugmentations = {
      Augmentation::none, Augmentation::rot90, Augmentation::rot180, Augmentation::rot270,
      Augmentation::hflip};

  std::vector<SynthesisRecord> records;
  records.reserve(cfg.water_types.size() * order.size());
  for (WaterType type : cfg.water_types) {
    const bool held_out = detail::contains(cfg.holdout_types, type);
    const ChannelCoefficients& coeffs = table.at(type);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      const std::size_t index = order[rank];
      SynthesisRecord rec;
      rec.source_id = source_ids[index];
      rec.image_index = index;
      rec.water_type = type;
      if (held_out) {
        rec.split = Split::holdout;
      } else if (rank < cfg.train_count) {
        rec.split = Split::train;
      } else if (rank < cfg.train_count + cfg.test_count) {
        rec.split = Split::test;
      } else {
        rec.split = Split::holdout;
      }

      RngStream stream = item_stream(cfg.master_seed, index, type);
      SynthesisParams p = sample_params(stream, type, cfg);
      AmbientLight ambient = ambient_light(coeffs, p.surface_depth, p.green_ambient);
      for (int retry = 0; cfg.resample_clamped && ambient.clamped &&
                          retry < detail::kMaxAmbientResamples;
           ++retry) {
        p.green_ambient = stream.uniform(cfg.green_ambient_range.lo, cfg.green_ambient_range.hi);
        ambient = ambient_light(coeffs, p.surface_depth, p.green_ambient);
      }
      if (cfg.augment && rec.split == Split::train) {
        rec.augmentation = kAugmentations[stream.below(kAugmentations.size())];
      }

      rec.surface_depth = p.surface_depth;
      rec.green_ambient = p.green_ambient;
      rec.ambient = ambient;
      rec.depth_range = cfg.depth_range;
      rec.seed = p.seed;
      rec.target_width = cfg.target_width;
      rec.target_height = cfg.target_height;
      rec.depth_scale = cfg.depth_scale;
      const std::string dir =
          std::string(to_string(type)) + "/" + std::string(to_string(rec.split)) + "/";
      rec.image_path = dir + rec.source_id + ".png";
      rec.ground_truth_path = dir + rec.source_id + ".gt.png";
      rec.depth_path = dir + rec.source_id + ".depth.png";
      records.push_back(std::move(rec));
    }
  }
  return records;
}

/// Prepared inputs of one item: resized, depth-rescaled and augmented.
struct PreparedPair {
  RgbImage clean;
  DepthMap depth;
};

inline PreparedPair prepare_pair(const SynthesisRecord& rec,
                                 const std::filesystem::path& input_dir) {
  RgbImage clean = read_rgb(input_dir / (rec.source_id + ".png"));
  DepthMap raw = read_depth(depth_file_for(input_dir, rec.source_id), rec.depth_scale);
  clean = resize_bilinear(clean, rec.target_width, rec.target_height);
  raw = resize_nearest(raw, rec.target_width, rec.target_height);
  DepthMap depth = rescale_depth(raw, rec.depth_range.lo, rec.depth_range.hi);
  return {augment(clean, rec.augmentation), augment(depth, rec.augmentation)};
}

/// Recomputes an item's synthesized image (unquantized) from its record and
/// the source files.
inline RgbImage resynthesize(const SynthesisRecord& rec, const std::filesystem::path& input_dir,
                             const CoefficientTable& table) {
  const PreparedPair pair = prepare_pair(rec, input_dir);
  const ChannelCoefficients& coeffs = table.at(rec.water_type);
  const AmbientLight ambient = ambient_light(coeffs, rec.surface_depth, rec.green_ambient);
  return synthesize_image(pair.clean, pair.depth, coeffs, rec.surface_depth, ambient);
}

struct ItemFailure {
  std::size_t item = 0;
  std::string source_id;
  WaterType water_type = WaterType::I;
  std::string message;
};

struct GenerationResult {
  /// Successful items, in plan order.
  std::vector<SynthesisRecord> records;
  std::vector<ItemFailure> failures;
};

/// Synthesizes and exports every planned item, then writes
/// `<output_dir>/manifest.json`. Per-item IO failures are collected and the
/// batch continues.
inline GenerationResult generate_dataset(const DatasetConfig& cfg, const CoefficientTable& table) {
  validate(cfg);
  const std::vector<std::string> sources = list_sources(cfg.input_dir);
  const std::vector<SynthesisRecord> plan = plan_dataset(cfg, sources, table);

  std::vector<std::optional<std::string>> errors(plan.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < plan.size(); i = next.fetch_add(1)) {
      const SynthesisRecord& rec = plan[i];
      try {
        const PreparedPair pair = prepare_pair(rec, cfg.input_dir);
        const ChannelCoefficients& coeffs = table.at(rec.water_type);
        const RgbImage out =
            synthesize_image(pair.clean, pair.depth, coeffs, rec.surface_depth, rec.ambient);
        write_rgb_png(cfg.output_dir / rec.image_path, out);
        write_rgb_png(cfg.output_dir / rec.ground_truth_path, pair.clean);
        write_depth_png(cfg.output_dir / rec.depth_path, pair.depth);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const std::size_t n_threads = std::min(cfg.workers, std::max<std::size_t>(plan.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  GenerationResult result;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (errors[i]) {
      result.failures.push_back({i, plan[i].source_id, plan[i].water_type, *errors[i]});
    } else {
      result.records.push_back(plan[i]);
    }
  }
  std::filesystem::create_directories(cfg.output_dir);
  write_manifest(result.records, cfg.output_dir / "manifest.json", cfg.normalize_export);
  return result;
}

}  // namespace aquasynth

