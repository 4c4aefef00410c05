#pragma once

// Planar floating-point images. Pixels are stored row-major with channels
// interleaved: index = (y * width + x) * Channels + c.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace aquasynth {

template <std::size_t Channels>
class Plane {
 public:
  static constexpr std::size_t channels = Channels;

  Plane() = default;
  Plane(std::size_t width, std::size_t height, double fill = 0.0)
      : width_(width), height_(height), data_(width * height * Channels, fill) {}
  Plane(std::size_t width, std::size_t height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_ * Channels) {
      throw DimensionMismatch("plane data size " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(width_) + "x" +
                              std::to_string(height_) + "x" + std::to_string(Channels));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return data_.empty(); }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return data_[(y * width_ + x) * Channels + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return data_[(y * width_ + x) * Channels + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool same_size(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
};

/// Three-channel RGB intensities, nominally in [0, 1].
using RgbImage = Plane<3>;
/// Per-pixel object-camera distance in meters.
using DepthMap = Plane<1>;

inline void require_same_size(const auto& a, const auto& b, std::string_view what) {
  if (!a.same_size(b)) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                            "x" + std::to_string(b.height()));
  }
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
template <std::size_t C>
Plane<C> resize_bilinear(const Plane<C>& src, std::size_t width, std::size_t height) {
  if (src.empty() || width == 0 || height == 0) throw InvalidParams("resize of empty image");
  if (src.width() == width && src.height() == height) return src;

  Plane<C> dst(width, height);
  const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
  const auto max_x = static_cast<double>(src.width() - 1);
  const auto max_y = static_cast<double>(src.height() - 1);

  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < C; ++c) {
        const double top = src.at(x0, y0, c) * (1.0 - wx) + src.at(x1, y0, c) * wx;
        const double bottom = src.at(x0, y1, c) * (1.0 - wx) + src.at(x1, y1, c) * wx;
        dst.at(x, y, c) = top * (1.0 - wy) + bottom * wy;
      }
    }
  }
  return dst;
}

/// Nearest-neighbour resampling; never invents values absent from the source.
template <std::size_t C>
Plane<C> resize_nearest(const Plane<C>& src, std::size_t width, std::size_t height) {
  if (src.empty() || width == 0 || height == 0) throw InvalidParams("resize of empty image");
  if (src.width() == width && src.height() == height) return src;

  Plane<C> dst(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = std::min(y * src.height() / height, src.height() - 1);
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = std::min(x * src.width() / width, src.width() - 1);
      for (std::size_t c = 0; c < C; ++c) dst.at(x, y, c) = src.at(sx, sy, c);
    }
  }
  return dst;
}

enum class Augmentation { none, rot90, rot180, rot270, hflip };

inline constexpr std::string_view to_string(Augmentation a) {
  switch (a) {
    case Augmentation::none: return "none";
    case Augmentation::rot90: return "rot90";
    case Augmentation::rot180: return "rot180";
    case Augmentation::rot270: return "rot270";
    case Augmentation::hflip: return "hflip";
  }
  return "none";
}

inline Augmentation augmentation_from_string(std::string_view name) {
  for (auto a : {Augmentation::none, Augmentation::rot90, Augmentation::rot180,
                 Augmentation::rot270, Augmentation::hflip}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidParams("unknown augmentation '" + std::string(name) + "'");
}

/// Vertical flip. Not one of the training augmentations, kept for composition.
template <std::size_t C>
Plane<C> vflip(const Plane<C>& src) {
  Plane<C> dst(src.width(), src.height());
  for (std::size_t y = 0; y < src.height(); ++y)
    for (std::size_t x = 0; x < src.width(); ++x)
      for (std::size_t c = 0; c < C; ++c) dst.at(x, src.height() - 1 - y, c) = src.at(x, y, c);
  return dst;
}

/// Exact pixel permutation. Rotations are counter-clockwise and require a
/// square image.
template <std::size_t C>
Plane<C> augment(const Plane<C>& src, Augmentation op) {
  const std::size_t w = src.width();
  const std::size_t h = src.height();
  if (op != Augmentation::none && op != Augmentation::hflip && w != h) {
    throw NonSquare(std::string(to_string(op)) + " on " + std::to_string(w) + "x" +
                    std::to_string(h) + " image");
  }

  Plane<C> dst(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t dx = x;
      std::size_t dy = y;
      switch (op) {
        case Augmentation::none: break;
        case Augmentation::rot90: dx = y; dy = w - 1 - x; break;
        case Augmentation::rot180: dx = w - 1 - x; dy = h - 1 - y; break;
        case Augmentation::rot270: dx = h - 1 - y; dy = x; break;
        case Augmentation::hflip: dx = w - 1 - x; break;
      }
      for (std::size_t c = 0; c < C; ++c) dst.at(dx, dy, c) = src.at(x, y, c);
    }
  }
  return dst;
}

/// Maps [0, 1] intensities to the [-1, 1] range used by network loaders.
inline RgbImage to_symmetric_unit(RgbImage img) {
  for (double& v : img.values()) v = 2.0 * v - 1.0;
  return img;
}

inline RgbImage from_symmetric_unit(RgbImage img) {
  for (double& v : img.values()) v = 0.5 * (v + 1.0);
  return img;
}

}  // namespace aquasynth
