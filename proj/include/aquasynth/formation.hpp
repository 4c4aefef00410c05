#pragma once

// Per-pixel underwater image formation with surface colour shift:
//
//   I_c(x) = E_c(x) * exp(-a_c * D) * t_c(x) + B_c * (1 - t_c(x)),
//   t_c(x) = exp(-beta_c * d(x)),
//
// where E is the clean image, D the surface-object depth, d(x) the
// object-camera distance and B the ambient light. All math is in double;
// quantization happens only on export.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ambient.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "water_optics.hpp"

namespace aquasynth {

inline constexpr double kDefaultMinSceneDepth = 0.25;
inline constexpr double kDefaultMaxSceneDepth = 20.0;
inline constexpr double kDefaultTransmissionFloor = 1e-6;

struct SynthesisParams {
  WaterType water_type = WaterType::I;
  /// Surface-object distance D in meters.
  double surface_depth = 0.0;
  /// Green ambient anchor B_g.
  double green_ambient = 0.75;
  double min_scene_depth = kDefaultMinSceneDepth;
  double max_scene_depth = kDefaultMaxSceneDepth;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthesisParams&, const SynthesisParams&) = default;
};

inline void validate(const SynthesisParams& p,
                     double max_surface_depth = kDefaultMaxSurfaceDepth) {
  if (!(p.surface_depth >= 0.0 && p.surface_depth <= max_surface_depth)) {
    throw InvalidParams("surface depth " + std::to_string(p.surface_depth) + " outside [0, " +
                        std::to_string(max_surface_depth) + "]");
  }
  if (!(p.green_ambient > 0.0 && p.green_ambient <= 1.0)) {
    throw InvalidParams("green ambient " + std::to_string(p.green_ambient) +
                        " outside (0, 1]");
  }
  if (!(p.min_scene_depth > 0.0 && p.min_scene_depth < p.max_scene_depth) ||
      !std::isfinite(p.max_scene_depth)) {
    throw InvalidParams("scene depth range must satisfy 0 < d_min < d_max");
  }
}

/// Irradiance left after travelling D meters down from the surface.
inline double attenuate_surface(double E_in, double absorption, double D) {
  return E_in * std::exp(-absorption * D);
}

/// Direct signal plus veiling light for one channel sample.
inline double synthesize_pixel(double J_prime, double ambient, double beta_c, double d) {
  const double t = std::exp(-beta_c * d);
  return J_prime * t + ambient * (1.0 - t);
}

/// Synthesizes with an explicit ambient triple (used when the caller already
/// holds it, e.g. for re-synthesis from a record).
inline RgbImage synthesize_image(const RgbImage& clean, const DepthMap& depth,
                                 const ChannelCoefficients& coeffs, double surface_depth,
                                 const AmbientLight& ambient) {
  require_same_size(clean, depth, "synthesize_image");

  RgbImage out(clean.width(), clean.height());
  for (Channel ch : kChannels) {
    const auto c = static_cast<std::size_t>(ch);
    const double surface = std::exp(-coeffs.absorption(ch) * surface_depth);
    const double att = beta(coeffs, ch);
    const double B = ambient[ch];
    for (std::size_t y = 0; y < clean.height(); ++y) {
      for (std::size_t x = 0; x < clean.width(); ++x) {
        out.at(x, y, c) = synthesize_pixel(clean.at(x, y, c) * surface, B, att, depth.at(x, y));
      }
    }
  }
  return out;
}

inline RgbImage synthesize_image(const RgbImage& clean, const DepthMap& depth,
                                 const ChannelCoefficients& coeffs, const SynthesisParams& params) {
  validate(params);
  const AmbientLight ambient = ambient_light(coeffs, params.surface_depth, params.green_ambient);
  return synthesize_image(clean, depth, coeffs, params.surface_depth, ambient);
}

struct InversionResult {
  RgbImage image;
  /// One flag per channel sample; 1 where transmission exceeded the floor.
  std::vector<std::uint8_t> valid;
  std::size_t valid_count = 0;
};

/// Analytic inverse of synthesize_image. Samples whose transmission is at or
/// below `transmission_floor` are masked out and left at zero.
inline InversionResult invert_formation(const RgbImage& observed, const DepthMap& depth,
                                        const ChannelCoefficients& coeffs,
                                        const SynthesisParams& params,
                                        double transmission_floor = kDefaultTransmissionFloor) {
  require_same_size(observed, depth, "invert_formation");
  validate(params);
  const AmbientLight ambient = ambient_light(coeffs, params.surface_depth, params.green_ambient);

  InversionResult result{RgbImage(observed.width(), observed.height()),
                         std::vector<std::uint8_t>(observed.pixel_count() * 3, 0), 0};
  for (Channel ch : kChannels) {
    const auto c = static_cast<std::size_t>(ch);
    const double surface = std::exp(-coeffs.absorption(ch) * params.surface_depth);
    const double att = beta(coeffs, ch);
    const double B = ambient[ch];
    for (std::size_t y = 0; y < observed.height(); ++y) {
      for (std::size_t x = 0; x < observed.width(); ++x) {
        const double t = std::exp(-att * depth.at(x, y));
        if (!(t > transmission_floor)) continue;
        result.image.at(x, y, c) = (observed.at(x, y, c) - B * (1.0 - t)) / (t * surface);
        result.valid[(y * observed.width() + x) * 3 + c] = 1;
        ++result.valid_count;
      }
    }
  }
  if (result.valid_count == 0) {
    throw DegenerateTransmission("every sample has transmission <= " +
                                 std::to_string(transmission_floor));
  }
  return result;
}

}  // namespace aquasynth
