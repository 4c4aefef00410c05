#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ambient.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "image.hpp"
#include "io.hpp"
#include "water_optics.hpp"

namespace aquasynth {

enum class Split { train, test, holdout };

inline constexpr std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::holdout: return "holdout";
  }
  return "holdout";
}

inline Split split_from_string(std::string_view name) {
  for (auto s : {Split::train, Split::test, Split::holdout}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidParams("unknown split '" + std::string(name) + "'");
}

enum class ExportNormalization { unit_interval, symmetric_unit };

inline constexpr std::string_view to_string(ExportNormalization n) {
  return n == ExportNormalization::unit_interval ? "unit-interval" : "symmetric-unit";
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// Everything needed to re-synthesize one dataset item bit-identically from
/// its source files.
struct SynthesisRecord {
  std::string source_id;
  std::uint64_t image_index = 0;
  WaterType water_type = WaterType::I;
  double surface_depth = 0.0;
  double green_ambient = 0.0;
  AmbientLight ambient;
  Range depth_range;
  std::uint64_t seed = 0;
  Augmentation augmentation = Augmentation::none;
  Split split = Split::holdout;
  std::size_t target_width = 0;
  std::size_t target_height = 0;
  double depth_scale = kDefaultDepthScale;
  /// Relative to the dataset output directory.
  std::string image_path;
  std::string ground_truth_path;
  std::string depth_path;

  SynthesisParams params() const {
    return {water_type, surface_depth, green_ambient, depth_range.lo, depth_range.hi, seed};
  }

  friend bool operator==(const SynthesisRecord&, const SynthesisRecord&) = default;
};

}  // namespace aquasynth
