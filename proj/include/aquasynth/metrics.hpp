#pragma once

// Image quality metrics: L1 reconstruction loss, PSNR, SSIM and UIQM.
// Inputs are RgbImage with a peak value of 1.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "image.hpp"
#include "io.hpp"

namespace aquasynth {

/// Mean absolute difference over all pixels and channels.
inline double l1_loss(const RgbImage& out, const RgbImage& gt) {
  require_same_size(out, gt, "l1_loss");
  const auto a = out.values();
  const auto b = gt.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

inline double mean_squared_error(const RgbImage& out, const RgbImage& gt) {
  require_same_size(out, gt, "mean_squared_error");
  const auto a = out.values();
  const auto b = gt.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

/// 10 log10(1 / MSE) in dB. Identical inputs give +infinity.
inline double psnr(const RgbImage& out, const RgbImage& gt) {
  const double mse = mean_squared_error(out, gt);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_kernel(std::size_t size, double sigma) {
  std::vector<double> k(size);
  const double centre = (static_cast<double>(size) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double x = static_cast<double>(i) - centre;
    k[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Separable "valid" filtering of one channel of a W×H plane.
inline std::vector<double> filter_valid(const std::vector<double>& src, std::size_t w,
                                        std::size_t h, const std::vector<double>& k) {
  const std::size_t n = k.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> rows(ow * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * src[y * w + x + i];
      rows[y * ow + x] = s;
    }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += k[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

inline std::vector<double> channel_of(const RgbImage& img, std::size_t c) {
  std::vector<double> out(img.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.values()[i * 3 + c];
  return out;
}

}  // namespace detail

/// Mean SSIM over the valid region of a Gaussian window, averaged over the
/// three channels.
inline double ssim(const RgbImage& out, const RgbImage& gt, const SsimOptions& opt = {}) {
  require_same_size(out, gt, "ssim");
  const std::size_t w = out.width();
  const std::size_t h = out.height();
  if (w < opt.window || h < opt.window) {
    throw ImageTooSmall("ssim needs at least " + std::to_string(opt.window) + "x" +
                        std::to_string(opt.window) + " pixels");
  }
  const auto kernel = detail::gaussian_kernel(opt.window, opt.sigma);
  const double c1 = (opt.k1 * opt.dynamic_range) * (opt.k1 * opt.dynamic_range);
  const double c2 = (opt.k2 * opt.dynamic_range) * (opt.k2 * opt.dynamic_range);

  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto x = detail::channel_of(out, c);
    const auto y = detail::channel_of(gt, c);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mu_x = detail::filter_valid(x, w, h, kernel);
    const auto mu_y = detail::filter_valid(y, w, h, kernel);
    const auto e_xx = detail::filter_valid(xx, w, h, kernel);
    const auto e_yy = detail::filter_valid(yy, w, h, kernel);
    const auto e_xy = detail::filter_valid(xy, w, h, kernel);

    double sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
      const double mx = mu_x[i];
      const double my = mu_y[i];
      const double vx = e_xx[i] - mx * mx;
      const double vy = e_yy[i] - my * my;
      const double cov = e_xy[i] - mx * my;
      sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mu_x.size());
  }
  return total / 3.0;
}

// UIQM = c1 * UICM + c2 * UISM + c3 * UIConM
//
// UICM  colourfulness: alpha-trimmed (10% each tail) mean and variance of the
//       opponent channels RG = R - G and YB = (R + G) / 2 - B, on a 0..255
//       scale: -0.0268 * |mu| + 0.1586 * sqrt(var_RG + var_YB).
// UISM  sharpness: per channel EME of (Sobel magnitude scaled to 0..255) x
//       channel, weighted 0.299 / 0.587 / 0.114.
// UIConM contrast: -1/(k1 k2) * sum over blocks of r * ln(r),
//       r = (max - min) / (max + min) over all channels of the block.
// Blocks are 10x10. When a side is not a multiple of 10 the grids anchored
// at both edges are averaged, which keeps the score mirror-invariant.
struct UiqmOptions {
  double c1 = 0.0282;
  double c2 = 0.2953;
  double c3 = 3.5753;
  std::size_t block = 10;
  double trim = 0.1;
  std::array<double, 3> sharpness_weights = {0.299, 0.587, 0.114};
};

struct UiqmScore {
  double uicm = 0.0;
  double uism = 0.0;
  double uiconm = 0.0;
  double uiqm = 0.0;
};

namespace detail {

inline double trimmed_mean(std::vector<double> v, double trim) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  const auto lo = static_cast<std::size_t>(std::ceil(trim * static_cast<double>(k)));
  const auto hi = static_cast<std::size_t>(std::floor(trim * static_cast<double>(k)));
  if (lo + hi >= k) throw ImageTooSmall("too few pixels for trimmed mean");
  double sum = 0.0;
  for (std::size_t i = lo; i < k - hi; ++i) sum += v[i];
  return sum / static_cast<double>(k - lo - hi);
}

inline double spread_about(const std::vector<double>& v, double mu) {
  double sum = 0.0;
  for (double x : v) sum += (x - mu) * (x - mu);
  return sum / static_cast<double>(v.size());
}

/// Top-left corners of the block grid(s) along one axis.
inline std::vector<std::size_t> grid_offsets(std::size_t extent, std::size_t block) {
  const std::size_t rem = extent % block;
  if (rem == 0) return {0};
  return {0, rem};
}

/// Averages `block_sum(x0, y0, kx, ky)` over the anchored grids.
template <typename BlockSum>
double over_grids(std::size_t w, std::size_t h, std::size_t block, BlockSum&& block_sum) {
  const auto xs = grid_offsets(w, block);
  const auto ys = grid_offsets(h, block);
  double total = 0.0;
  for (std::size_t oy : ys)
    for (std::size_t ox : xs) total += block_sum(ox, oy, w / block, h / block);
  return total / static_cast<double>(xs.size() * ys.size());
}

/// Sobel gradient magnitude with edge-replicating borders.
inline std::vector<double> sobel_magnitude(const std::vector<double>& p, std::size_t w,
                                           std::size_t h) {
  auto at = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
    x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
    y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
    return p[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  };
  std::vector<double> mag(w * h);
  for (std::size_t yi = 0; yi < h; ++yi) {
    for (std::size_t xi = 0; xi < w; ++xi) {
      const auto x = static_cast<std::ptrdiff_t>(xi);
      const auto y = static_cast<std::ptrdiff_t>(yi);
      const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
      const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                        (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
      mag[yi * w + xi] = std::hypot(gx, gy);
    }
  }
  return mag;
}

inline double eme(const std::vector<double>& p, std::size_t w, std::size_t h, std::size_t block) {
  return over_grids(w, h, block, [&](std::size_t ox, std::size_t oy, std::size_t kx,
                                     std::size_t ky) {
    double sum = 0.0;
    for (std::size_t by = 0; by < ky; ++by)
      for (std::size_t bx = 0; bx < kx; ++bx) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t y = 0; y < block; ++y)
          for (std::size_t x = 0; x < block; ++x) {
            const double v = p[(oy + by * block + y) * w + ox + bx * block + x];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
        if (lo > 0.0 && hi > 0.0) sum += std::log(hi / lo);
      }
    return 2.0 / static_cast<double>(kx * ky) * sum;
  });
}

}  // namespace detail

inline double uicm(const RgbImage& img, double trim = 0.1) {
  std::vector<double> rg(img.pixel_count());
  std::vector<double> yb(img.pixel_count());
  const auto v = img.values();
  for (std::size_t i = 0; i < rg.size(); ++i) {
    const double r = 255.0 * v[i * 3];
    const double g = 255.0 * v[i * 3 + 1];
    const double b = 255.0 * v[i * 3 + 2];
    rg[i] = r - g;
    yb[i] = (r + g) / 2.0 - b;
  }
  const double mu_rg = detail::trimmed_mean(rg, trim);
  const double mu_yb = detail::trimmed_mean(yb, trim);
  const double var_rg = detail::spread_about(rg, mu_rg);
  const double var_yb = detail::spread_about(yb, mu_yb);
  return -0.0268 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) + 0.1586 * std::sqrt(var_rg + var_yb);
}

inline double uism(const RgbImage& img, const UiqmOptions& opt = {}) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    auto channel = detail::channel_of(img, c);
    for (double& x : channel) x *= 255.0;
    auto mag = detail::sobel_magnitude(channel, w, h);
    const double peak = *std::max_element(mag.begin(), mag.end());
    for (std::size_t i = 0; i < mag.size(); ++i) {
      mag[i] = peak > 0.0 ? mag[i] * (255.0 / peak) * channel[i] : 0.0;
    }
    total += opt.sharpness_weights[c] * detail::eme(mag, w, h, opt.block);
  }
  return total;
}

inline double uiconm(const RgbImage& img, std::size_t block = 10) {
  const std::size_t w = img.width();
  const auto v = img.values();
  return detail::over_grids(
      w, img.height(), block,
      [&](std::size_t ox, std::size_t oy, std::size_t kx, std::size_t ky) {
        double sum = 0.0;
        for (std::size_t by = 0; by < ky; ++by)
          for (std::size_t bx = 0; bx < kx; ++bx) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t y = 0; y < block; ++y)
              for (std::size_t x = 0; x < block; ++x)
                for (std::size_t c = 0; c < 3; ++c) {
                  const double s =
                      255.0 * v[((oy + by * block + y) * w + ox + bx * block + x) * 3 + c];
                  lo = std::min(lo, s);
                  hi = std::max(hi, s);
                }
            const double top = hi - lo;
            const double bottom = hi + lo;
            if (top > 0.0 && bottom > 0.0) {
              const double r = top / bottom;
              sum += r * std::log(r);
            }
          }
        return -sum / static_cast<double>(kx * ky);
      });
}

inline UiqmScore uiqm_components(const RgbImage& img, const UiqmOptions& opt = {}) {
  if (img.width() < opt.block || img.height() < opt.block) {
    throw ImageTooSmall("uiqm needs at least " + std::to_string(opt.block) + "x" +
                        std::to_string(opt.block) + " pixels");
  }
  UiqmScore s;
  s.uicm = uicm(img, opt.trim);
  s.uism = uism(img, opt);
  s.uiconm = uiconm(img, opt.block);
  s.uiqm = opt.c1 * s.uicm + opt.c2 * s.uism + opt.c3 * s.uiconm;
  return s;
}

inline double uiqm(const RgbImage& img, const UiqmOptions& opt = {}) {
  return uiqm_components(img, opt).uiqm;
}

struct ImageScore {
  std::string name;
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> l1;
  std::optional<double> uiqm;
  std::optional<std::string> error;
};

struct MetricMean {
  double value = 0.0;
  std::size_t count = 0;
};

struct MetricReport {
  std::vector<ImageScore> images;
  std::optional<MetricMean> psnr;
  std::optional<MetricMean> ssim;
  std::optional<MetricMean> l1;
  std::optional<MetricMean> uiqm;

  std::size_t failure_count() const {
    return static_cast<std::size_t>(
        std::count_if(images.begin(), images.end(), [](const auto& s) { return s.error; }));
  }
};

namespace detail {
inline std::optional<MetricMean> mean_of(const std::vector<ImageScore>& images,
                                         std::optional<double> ImageScore::*field) {
  MetricMean m;
  double sum = 0.0;
  for (const auto& s : images) {
    if (!(s.*field)) continue;
    sum += *(s.*field);
    ++m.count;
  }
  if (m.count == 0) return std::nullopt;
  m.value = sum / static_cast<double>(m.count);
  return m;
}
}  // namespace detail

/// Scores every `*.png` in `pred_dir` (sorted by name). With a reference
/// directory, same-named files are compared with PSNR, SSIM and L1; UIQM is
/// always computed on the prediction. Aggregation order is the name order
/// regardless of `workers`.
inline MetricReport evaluate_directories(const std::filesystem::path& pred_dir,
                                         const std::optional<std::filesystem::path>& ref_dir,
                                         std::size_t workers = 1) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir.string());
  if (ref_dir && !fs::is_directory(*ref_dir)) throw IoError("not a directory: " + ref_dir->string());

  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(pred_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") {
      names.push_back(e.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());

  MetricReport report;
  report.images.resize(names.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < names.size(); i = next.fetch_add(1)) {
      ImageScore& s = report.images[i];
      s.name = names[i];
      try {
        const RgbImage pred = read_rgb(pred_dir / names[i]);
        if (ref_dir) {
          const RgbImage ref = read_rgb(*ref_dir / names[i]);
          s.psnr = psnr(pred, ref);
          s.ssim = ssim(pred, ref);
          s.l1 = l1_loss(pred, ref);
        }
        s.uiqm = uiqm(pred);
      } catch (const std::exception& e) {
        s.error = e.what();
      }
    }
  };
  const std::size_t n = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(names.size(), 1));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work);
  }

  report.psnr = detail::mean_of(report.images, &ImageScore::psnr);
  report.ssim = detail::mean_of(report.images, &ImageScore::ssim);
  report.l1 = detail::mean_of(report.images, &ImageScore::l1);
  report.uiqm = detail::mean_of(report.images, &ImageScore::uiqm);
  return report;
}

}  // namespace aquasynth
