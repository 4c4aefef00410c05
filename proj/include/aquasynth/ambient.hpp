#pragma once

// Depth-dependent ambient (veiling) light. The three channel intensities are
// tied together through the water's absorption and scattering and the
// surface-object depth D; only the green channel is a free parameter.

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "rng.hpp"
#include "water_optics.hpp"

namespace aquasynth {

inline constexpr double kDefaultMaxSurfaceDepth = 5.0;
inline constexpr double kGreenAmbientMin = 0.5;
inline constexpr double kGreenAmbientMax = 1.0;

struct AmbientLight {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  /// Set when a channel exceeded 1 and was clamped.
  bool clamped = false;

  constexpr double operator[](Channel c) const {
    switch (c) {
      case Channel::r: return r;
      case Channel::g: return g;
      case Channel::b: return b;
    }
    return 0.0;
  }

  friend bool operator==(const AmbientLight&, const AmbientLight&) = default;
};

/// Ambient light at infinite range for one channel, before normalization:
/// b * exp(-(a + b) * D) / (a + b) * E0.
inline double unnormalized_ambient(const ChannelCoefficients& coeffs, Channel c, double D,
                                   double E0 = 1.0) {
  const double a = coeffs.absorption(c);
  const double b = coeffs.scattering(c);
  return b * std::exp(-(a + b) * D) / (a + b) * E0;
}

namespace detail {
inline double ambient_ratio(const ChannelCoefficients& coeffs, Channel c, double D) {
  const double a_c = coeffs.absorption(c);
  const double b_c = coeffs.scattering(c);
  const double a_g = coeffs.a_g;
  const double b_g = coeffs.b_g;
  return (b_c / b_g) * ((a_g + b_g) / (a_c + b_c)) * std::exp(-(a_c + b_c - a_g - b_g) * D);
}
}  // namespace detail

/// B_r / B_g at surface-object depth D, assuming equal surface irradiance.
inline double ambient_ratio_rg(const ChannelCoefficients& coeffs, double D) {
  return detail::ambient_ratio(coeffs, Channel::r, D);
}

/// B_b / B_g at surface-object depth D.
inline double ambient_ratio_bg(const ChannelCoefficients& coeffs, double D) {
  return detail::ambient_ratio(coeffs, Channel::b, D);
}

/// Ambient triple anchored at a chosen green value. Channels above 1 are
/// clamped and the result is flagged.
inline AmbientLight ambient_light(const ChannelCoefficients& coeffs, double D, double green,
                                  double max_surface_depth = kDefaultMaxSurfaceDepth) {
  if (!(D >= 0.0 && D <= max_surface_depth)) {
    throw OutOfRange("surface depth D=" + std::to_string(D) + " outside [0, " +
                     std::to_string(max_surface_depth) + "]");
  }
  if (!(green > 0.0 && green <= 1.0)) {
    throw OutOfRange("green ambient B_g=" + std::to_string(green) + " outside (0, 1]");
  }

  AmbientLight light{ambient_ratio_rg(coeffs, D) * green, green,
                     ambient_ratio_bg(coeffs, D) * green, false};
  if (light.r > 1.0) {
    light.r = 1.0;
    light.clamped = true;
  }
  if (light.b > 1.0) {
    light.b = 1.0;
    light.clamped = true;
  }
  return light;
}

/// Draws the green ambient value uniformly from [0.5, 1].
inline double sample_bg(RngStream& stream) {
  return stream.uniform(kGreenAmbientMin, kGreenAmbientMax);
}

}  // namespace aquasynth
