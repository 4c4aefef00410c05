#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "aquasynth/aquasynth.hpp"

namespace aquasynth::test {

/// Integer-pattern texture in [0.05, 0.95]; tests/oracles/derive_values.py
/// builds the same image.
inline RgbImage pattern_image(std::size_t w, std::size_t h) {
  RgbImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      img.at(x, y, 0) = 0.05 + 0.9 * (static_cast<double>((3 * x * x + 7 * y + x * y) % 23) / 22.0);
      img.at(x, y, 1) =
          0.05 + 0.9 * (static_cast<double>((5 * x + 11 * y * y + 2 * x * y) % 19) / 18.0);
      img.at(x, y, 2) =
          0.05 + 0.9 * (static_cast<double>((x * 13 + y * 17 + (x ^ y)) % 29) / 28.0);
    }
  return img;
}

inline RgbImage random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                             double hi = 1.0) {
  RngStream rng(seed);
  RgbImage img(w, h);
  for (double& v : img.values()) v = rng.uniform(lo, hi);
  return img;
}

inline DepthMap random_depth(std::size_t w, std::size_t h, std::uint64_t seed, double lo,
                             double hi) {
  RngStream rng(seed);
  DepthMap d(w, h);
  for (double& v : d.values()) v = rng.uniform(lo, hi);
  return d;
}

/// Valid coefficients with every value drawn from [lo, hi].
inline ChannelCoefficients random_coefficients(RngStream& rng, double lo = 0.005, double hi = 2.0) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi),
          rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

/// A table with the same coefficients for every water type.
inline CoefficientTable uniform_table(const ChannelCoefficients& c) {
  nlohmann::json doc;
  for (WaterType t : kAllWaterTypes) {
    doc[std::string(to_string(t))] = {{"a_r", c.a_r}, {"a_g", c.a_g}, {"a_b", c.a_b},
                                      {"b_r", c.b_r}, {"b_g", c.b_g}, {"b_b", c.b_b}};
  }
  return CoefficientTable::from_json(doc);
}

/// Red-attenuating water: beta_r > beta_g > beta_b.
inline ChannelCoefficients red_attenuating() { return {0.5, 0.05, 0.02, 0.1, 0.05, 0.08}; }

/// Self-deleting scratch directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "aquasynth") {
    static std::atomic<int> counter{0};
    std::random_device rd;
    std::ostringstream name;
    name << tag << "-" << rd() << "-" << counter++;
    path_ = std::filesystem::temp_directory_path() / name.str();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

/// Writes `<dir>/<id>.png` (8-bit RGB noise) and `<dir>/<id>.depth.png`
/// (16-bit ramp plus noise, millimeters).
inline void write_source_pair(const std::filesystem::path& dir, const std::string& id, int w,
                              int h, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  cv::Mat rgb(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) rgb.at<cv::Vec3b>(y, x)[c] = static_cast<std::uint8_t>(rng() % 256);
  cv::Mat depth(h, w, CV_16UC1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      depth.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(500 + 40 * (x + y) + rng() % 300);
  cv::imwrite((dir / (id + ".png")).string(), rgb);
  cv::imwrite((dir / (id + ".depth.png")).string(), depth);
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace aquasynth::test
