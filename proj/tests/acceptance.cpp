// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace aquasynth;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Verdict ambient_ratio_equivalence() {
  Timer timer;
  RngStream rng(0xA1);
  double worst = 0.0;
  constexpr int n = 5000;
  for (int i = 0; i < n; ++i) {
    const auto c = test::random_coefficients(rng);
    const double D = rng.uniform(0.0, 5.0);
    const double g = unnormalized_ambient(c, Channel::g, D);
    const double rg = unnormalized_ambient(c, Channel::r, D) / g;
    const double bg = unnormalized_ambient(c, Channel::b, D) / g;
    worst = std::max({worst, std::abs(ambient_ratio_rg(c, D) - rg) / std::abs(rg),
                      std::abs(ambient_ratio_bg(c, D) - bg) / std::abs(bg)});
  }
  const double t = timer.seconds();
  return {worst <= 1e-12 && t < 1.0,
          std::to_string(n) + " sets, " + fmt("max rel err %.3g, %.3f s", worst, t)};
}

Verdict formation_limits() {
  Timer timer;
  RngStream rng(0xA2);
  double near_err = 0.0;
  double far_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = test::random_coefficients(rng, 0.05, 2.0);
    const double D = rng.uniform(0.0, 5.0);
    const auto clean = test::random_image(64, 64, 100 + trial);
    const AmbientLight B = ambient_light(c, D, rng.uniform(0.5, 1.0));

    const auto near = synthesize_image(clean, DepthMap(64, 64, 1e-12), c, D, B);
    double beta_min = std::numeric_limits<double>::infinity();
    for (Channel ch : kChannels) beta_min = std::min(beta_min, beta(c, ch));
    const auto far = synthesize_image(clean, DepthMap(64, 64, 30.0 / beta_min), c, D, B);

    for (std::size_t y = 0; y < 64; ++y)
      for (std::size_t x = 0; x < 64; ++x)
        for (Channel ch : kChannels) {
          const auto ci = static_cast<std::size_t>(ch);
          const double surface = clean.at(x, y, ci) * std::exp(-c.absorption(ch) * D);
          near_err = std::max(near_err, std::abs(near.at(x, y, ci) - surface));
          // Residual direct signal at beta*d >= 30 is below e^-30 ~ 9.4e-14.
          far_err = std::max(far_err, std::abs(far.at(x, y, ci) - B[ch]));
        }
  }
  const double t = timer.seconds();
  return {near_err <= 1e-9 && far_err <= 1e-12 && t < 1.0,
          fmt("near err %.3g, far err %.3g", near_err, far_err) + fmt(", %.3f s", t)};
}

Verdict round_trip() {
  Timer timer;
  const auto table = load_coefficient_table(AQUASYNTH_COEFFS);
  RngStream rng(0xA3);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int i = 0; i < 20; ++i) {
    SynthesisParams p;
    p.water_type = kAllWaterTypes[static_cast<std::size_t>(i) % kAllWaterTypes.size()];
    p.surface_depth = rng.uniform(0.0, 5.0);
    p.green_ambient = rng.uniform(0.5, 1.0);
    const auto& c = table.at(p.water_type);
    const auto clean = test::random_image(128, 128, 200 + i);
    const auto depth = test::random_depth(128, 128, 300 + i, 0.25, 20.0);
    const auto observed = synthesize_image(clean, depth, c, p);
    const auto inv = invert_formation(observed, depth, c, p);
    const auto a = inv.image.values();
    const auto b = clean.values();
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!inv.valid[k]) continue;
      worst = std::max(worst, std::abs(a[k] - b[k]));
      ++checked;
    }
  }
  const double t = timer.seconds();
  return {worst < 1e-6 && checked > 0 && t < 5.0,
          std::to_string(checked) + " samples, " + fmt("max abs err %.3g, %.3f s", worst, t)};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = test::read_bytes(e.path());
  }
  return out;
}

Verdict determinism() {
  test::TempDir dir("aquasynth-accept");
  for (int i = 0; i < 6; ++i) test::write_source_pair(dir / "in", "src" + std::to_string(i), 48, 40, i);

  auto run = [&](const std::string& name, int workers) {
    const auto cfg = nlohmann::json{{"input_dir", (dir / "in").string()},
                                    {"output_dir", (dir / name).string()},
                                    {"water_types", {"I", "II", "5C", "9C"}},
                                    {"holdout_types", nlohmann::json::array()},
                                    {"images_per_type", 5},
                                    {"split", {{"train", 3}, {"test", 2}}},
                                    {"target_size", 32},
                                    {"master_seed", 20240611},
                                    {"augment", true}};
    test::write_text(dir / (name + ".json"), cfg.dump());
    const std::string cmd = std::string("\"") + AQUASYNTH_CLI + "\" --coeffs \"" +
                            AQUASYNTH_COEFFS + "\" --workers " + std::to_string(workers) +
                            " dataset --config \"" + (dir / (name + ".json")).string() +
                            "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  if (run("a", 1) != 0 || run("b", 1) != 0 || run("c", 8) != 0) {
    return {false, "dataset command failed"};
  }
  const auto a = tree_bytes(dir / "a");
  const bool same = a == tree_bytes(dir / "b") && a == tree_bytes(dir / "c");
  return {same && a.count("manifest.json") == 1,
          std::to_string(a.size()) + " files compared across 3 runs (workers 1, 1, 8)"};
}

Verdict protocol_conformance() {
  const auto table = load_coefficient_table(AQUASYNTH_COEFFS);
  std::vector<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.push_back("nyu" + std::to_string(10000 + i));
  const DatasetConfig cfg;
  const auto plan = plan_dataset(cfg, ids, table);
  std::size_t train = 0, test_n = 0;
  bool ranges = true;
  for (const auto& r : plan) {
    if (r.water_type == WaterType::C9) continue;
    train += r.split == Split::train;
    test_n += r.split == Split::test;
    ranges = ranges && r.surface_depth >= 0.0 && r.surface_depth <= 5.0 &&
             r.green_ambient >= 0.5 && r.green_ambient <= 1.0;
  }

  double dlo = std::numeric_limits<double>::infinity(), dhi = -dlo;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto raw = test::random_depth(64, 64, 400 + s, 0.1 + static_cast<double>(s), 50.0);
    for (double d : rescale_depth(raw, cfg.depth_range.lo, cfg.depth_range.hi).values()) {
      dlo = std::min(dlo, d);
      dhi = std::max(dhi, d);
    }
  }
  ranges = ranges && dlo >= 0.25 && dhi <= 20.0;
  return {train == 6300 && test_n == 2700 && ranges,
          std::to_string(train) + " train / " + std::to_string(test_n) + " test, " +
              fmt("depth in [%.4g, %.4g]", dlo, dhi)};
}

Verdict metric_closed_forms() {
  const double p = psnr(RgbImage(32, 32, 0.4), RgbImage(32, 32, 0.5));
  const auto x = test::random_image(40, 40, 7);
  const double s = ssim(x, x);
  bool axioms = true;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto a = test::random_image(16, 16, 3 * i + 1000);
    const auto b = test::random_image(16, 16, 3 * i + 1001);
    const auto c = test::random_image(16, 16, 3 * i + 1002);
    axioms = axioms && l1_loss(a, a) == 0.0 && l1_loss(a, b) > 0.0 &&
             l1_loss(a, b) == l1_loss(b, a) && l1_loss(a, c) <= l1_loss(a, b) + l1_loss(b, c);
  }
  return {std::abs(p - 20.0) <= 1e-9 && s == 1.0 && axioms,
          fmt("psnr %.12f dB, ssim(x,x) %.17g", p, s) + (axioms ? ", l1 axioms hold" : ", l1 axioms broken")};
}

Verdict fusion_kernels() {
  const auto arrays = load_named_arrays(fs::path(AQUASYNTH_TEST_DATA) / "fusion_fixture.json");
  const auto input = tensor_from_array(arrays.at("input"));
  const auto norm = instance_normalize(input);
  double mean_err = 0.0, std_err = 0.0;
  for (std::size_t n = 0; n < norm.batch(); ++n)
    for (std::size_t c = 0; c < norm.channels(); ++c) {
      const auto sl = norm.slice(n, c);
      const double k = static_cast<double>(sl.size());
      double m = 0.0, v = 0.0;
      for (double e : sl) m += e;
      m /= k;
      for (double e : sl) v += (e - m) * (e - m);
      mean_err = std::max(mean_err, std::abs(m));
      std_err = std::max(std_err, std::abs(std::sqrt(v / k) - 1.0));
    }

  const bool identity =
      sft_modulate(input, {FeatureTensor(input.shape()), FeatureTensor(input.shape())}) == input;

  const auto params = adaptive_params_from_arrays(arrays);
  const auto da = tensor_from_array(arrays.at("descriptor_a"));
  const auto db = tensor_from_array(arrays.at("descriptor_b"));
  const auto w = adaptive_weights({da, db}, params);

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMat> w1(params.fc1.weight.data(), params.fc1.outputs, params.fc1.inputs);
  const Eigen::Map<const RowMat> w2(params.fc2.weight.data(), params.fc2.outputs, params.fc2.inputs);
  const Eigen::Map<const Eigen::VectorXd> b1(params.fc1.bias.data(), params.fc1.outputs);
  const Eigen::Map<const Eigen::VectorXd> b2(params.fc2.bias.data(), params.fc2.outputs);
  double oracle_err = 0.0;
  bool open_interval = true;
  for (std::size_t n = 0; n < w.batch; ++n) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(params.fc1.inputs));
    Eigen::Index k = 0;
    for (const auto* d : {&da, &db})
      for (std::size_t c = 0; c < d->channels(); ++c) z[k++] = d->at(n, c, 0, 0);
    const Eigen::VectorXd h = (w1 * z + b1).cwiseMax(0.0);
    const Eigen::VectorXd y =
        (w2 * h + b2).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    for (std::size_t i = 0; i < w.priors; ++i) {
      oracle_err = std::max(oracle_err, std::abs(w.at(n, i) - y[static_cast<Eigen::Index>(i)]));
      open_interval = open_interval && w.at(n, i) > 0.0 && w.at(n, i) < 1.0;
    }
  }
  return {mean_err < 1e-6 && std_err < 1e-3 && identity && open_interval && oracle_err <= 1e-10,
          fmt("|mean| %.3g, |std-1| %.3g", mean_err, std_err) +
              fmt(", weight err %.3g", oracle_err) + (identity ? ", sft identity exact" : ", sft identity broken")};
}

Verdict water_type_signature() {
  // beta = (0.60, 0.14, 0.08): red attenuates fastest.
  const ChannelCoefficients c{0.50, 0.08, 0.03, 0.10, 0.06, 0.05};
  const double D = 3.0;
  const AmbientLight B = ambient_light(c, D, 0.75);
  const RgbImage card(32, 32, 1.0);
  auto means = [&](double d) {
    const auto img = synthesize_image(card, DepthMap(32, 32, d), c, D, B);
    std::array<double, 3> m{};
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
      for (std::size_t ch = 0; ch < 3; ++ch) m[ch] += img.values()[i * 3 + ch];
    for (double& v : m) v /= static_cast<double>(img.pixel_count());
    return m;
  };
  const auto at5 = means(5.0);
  const double r1 = means(1.0)[0], r10 = means(10.0)[0];
  const bool ordered = beta(c, Channel::r) > beta(c, Channel::g) && beta(c, Channel::g) > beta(c, Channel::b);
  return {ordered && at5[0] < at5[1] && r1 > at5[0] && at5[0] > r10,
          fmt("d=5: r %.4f g %.4f", at5[0], at5[1]) + fmt(", red at d=1/5/10: %.4f > %.4f", r1, at5[0]) +
              fmt(" > %.4f", r10)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"ambient ratio equivalence", ambient_ratio_equivalence},
      {"formation limits", formation_limits},
      {"synthesis/inversion round trip", round_trip},
      {"dataset determinism", determinism},
      {"dataset protocol conformance", protocol_conformance},
      {"metric closed forms", metric_closed_forms},
      {"fusion kernels", fusion_kernels},
      {"water-type color signature", water_type_signature},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
