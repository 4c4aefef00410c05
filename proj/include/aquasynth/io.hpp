#pragma once

// Image file IO. Colour images are 8- or 16-bit PNG; depth maps are PGM or
// 16-bit PNG holding raw integer units that a scale factor converts to
// meters. Export quantizes with round-half-up after clamping to [0, 1].

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "errors.hpp"
#include "image.hpp"

namespace aquasynth {

/// Default raw-depth unit: millimeters.
inline constexpr double kDefaultDepthScale = 0.001;

inline std::uint8_t quantize_u8(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

inline RgbImage read_rgb(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_COLOR);
  if (m.empty()) throw IoError("cannot read image " + path.string());

  double full_scale = 0.0;
  if (m.depth() == CV_8U) {
    full_scale = 255.0;
  } else if (m.depth() == CV_16U) {
    full_scale = 65535.0;
  } else {
    throw IoError("unsupported sample depth in " + path.string());
  }

  RgbImage img(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      for (int c = 0; c < 3; ++c) {
        // OpenCV stores BGR.
        const double raw = m.depth() == CV_8U ? m.at<cv::Vec3b>(y, x)[2 - c]
                                              : m.at<cv::Vec3w>(y, x)[2 - c];
        img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y),
               static_cast<std::size_t>(c)) = raw / full_scale;
      }
    }
  }
  return img;
}

inline void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
  cv::Mat m(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      auto& px = m.at<cv::Vec3b>(static_cast<int>(y), static_cast<int>(x));
      for (std::size_t c = 0; c < 3; ++c) px[2 - c] = quantize_u8(img.at(x, y, c));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::vector<int> opts = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imwrite(path.string(), m, opts)) throw IoError("cannot write " + path.string());
}

/// Reads an 8/16-bit single channel depth file and multiplies by `scale`.
inline DepthMap read_depth(const std::filesystem::path& path, double scale = kDefaultDepthScale) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
  if (m.empty()) throw IoError("cannot read depth " + path.string());

  DepthMap depth(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      double raw = 0.0;
      if (m.depth() == CV_8U) {
        raw = m.at<std::uint8_t>(y, x);
      } else if (m.depth() == CV_16U) {
        raw = m.at<std::uint16_t>(y, x);
      } else {
        throw IoError("unsupported depth sample type in " + path.string());
      }
      depth.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = raw * scale;
    }
  }
  return depth;
}

/// Writes depth as 16-bit PNG in raw units of `scale` meters.
inline void write_depth_png(const std::filesystem::path& path, const DepthMap& depth,
                            double scale = kDefaultDepthScale) {
  cv::Mat m(static_cast<int>(depth.height()), static_cast<int>(depth.width()), CV_16UC1);
  for (std::size_t y = 0; y < depth.height(); ++y) {
    for (std::size_t x = 0; x < depth.width(); ++x) {
      const double raw = std::clamp(std::floor(depth.at(x, y) / scale + 0.5), 0.0, 65535.0);
      m.at<std::uint16_t>(static_cast<int>(y), static_cast<int>(x)) =
          static_cast<std::uint16_t>(raw);
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::vector<int> opts = {cv::IMWRITE_PNG_COMPRESSION, 6};
  if (!cv::imwrite(path.string(), m, opts)) throw IoError("cannot write " + path.string());
}

}  // namespace aquasynth
