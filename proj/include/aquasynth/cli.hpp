#pragma once

// Command-line front end. stdout carries JSON results, stderr diagnostics.
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ambient.hpp"
#include "errors.hpp"
#include "formation.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "water_optics.hpp"

namespace aquasynth::cli {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

class Logger {
 public:
  Logger(std::ostream& sink, LogLevel level) : sink_(sink), level_(level) {}
  void log(LogLevel lvl, const std::string& msg) const {
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    if (lvl <= level_) sink_ << "[" << names[static_cast<int>(lvl)] << "] " << msg << "\n";
  }
  void error(const std::string& m) const { log(LogLevel::error, m); }
  void warn(const std::string& m) const { log(LogLevel::warn, m); }
  void info(const std::string& m) const { log(LogLevel::info, m); }

 private:
  std::ostream& sink_;
  LogLevel level_;
};

namespace detail {

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(what) {}
};

inline nlohmann::ordered_json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::ordered_json mean_json(const std::optional<MetricMean>& m) {
  if (!m) return nullptr;
  return number_or_inf(m->value);
}

inline nlohmann::ordered_json report_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["count"] = report.images.size();
  j["failures"] = report.failure_count();
  j["mean"] = {{"psnr", mean_json(report.psnr)},
               {"ssim", mean_json(report.ssim)},
               {"l1", mean_json(report.l1)},
               {"uiqm", mean_json(report.uiqm)}};
  j["images"] = nlohmann::ordered_json::array();
  for (const auto& s : report.images) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    if (s.psnr) e["psnr"] = number_or_inf(*s.psnr);
    if (s.ssim) e["ssim"] = *s.ssim;
    if (s.l1) e["l1"] = *s.l1;
    if (s.uiqm) e["uiqm"] = *s.uiqm;
    if (s.error) e["error"] = *s.error;
    j["images"].push_back(std::move(e));
  }
  return j;
}

inline std::string csv_field(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return "inf";
  std::ostringstream s;
  s << std::setprecision(17) << *v;
  return s.str();
}

inline void write_report_csv(const MetricReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "name,psnr,ssim,l1,uiqm,error\n";
  for (const auto& s : report.images) {
    std::string err = s.error.value_or("");
    for (char& c : err)
      if (c == ',' || c == '\n') c = ' ';
    out << s.name << ',' << csv_field(s.psnr) << ',' << csv_field(s.ssim) << ','
        << csv_field(s.l1) << ',' << csv_field(s.uiqm) << ',' << err << '\n';
  }
}

inline std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) {
      const auto n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw UsageError("bad --size '" + text + "', expected N or WxH");
  }
}

}  // namespace detail

/// Runs the tool on `args` (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physics-based underwater image synthesis and evaluation", "aquasynth"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string coeffs_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string log_level = "warn";
  app.add_option("--coeffs", coeffs_path, "Coefficient table JSON (fallback: $AQUA_COEFFS)");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

  // ambient
  auto* ambient_cmd = app.add_subcommand("ambient", "Ambient light triple for a water type");
  std::string amb_type;
  double amb_D = 0.0;
  double amb_bg = 0.0;
  ambient_cmd->add_option("--type", amb_type, "Water type")->required();
  ambient_cmd->add_option("--D", amb_D, "Surface-object depth in meters")->required();
  ambient_cmd->add_option("--Bg", amb_bg, "Green ambient value")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize one underwater image");
  std::string syn_clean, syn_depth, syn_type, syn_out, syn_gt_out, syn_size;
  std::optional<double> syn_D, syn_bg;
  double syn_depth_scale = kDefaultDepthScale;
  double syn_dmin = kDefaultMinSceneDepth;
  double syn_dmax = kDefaultMaxSceneDepth;
  synth_cmd->add_option("--clean", syn_clean, "Clean RGB PNG")->required();
  synth_cmd->add_option("--depth", syn_depth, "Raw depth PNG/PGM")->required();
  synth_cmd->add_option("--type", syn_type, "Water type")->required();
  synth_cmd->add_option("--out", syn_out, "Output PNG")->required();
  synth_cmd->add_option("--gt-out", syn_gt_out, "Also write the prepared clean image");
  synth_cmd->add_option("--D", syn_D, "Surface-object depth (default: sampled)");
  synth_cmd->add_option("--Bg", syn_bg, "Green ambient (default: sampled)");
  synth_cmd->add_option("--depth-scale", syn_depth_scale, "Meters per raw depth unit");
  synth_cmd->add_option("--d-min", syn_dmin, "Minimum scene depth in meters");
  synth_cmd->add_option("--d-max", syn_dmax, "Maximum scene depth in meters");
  synth_cmd->add_option("--size", syn_size, "Resize to N or WxH before synthesis");

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Build a synthetic dataset");
  std::string ds_config;
  dataset_cmd->add_option("--config", ds_config, "Dataset config JSON")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions");
  std::string ev_pred, ev_ref, ev_csv;
  bool ev_no_ref = false;
  eval_cmd->add_option("--pred", ev_pred, "Directory of predicted PNGs")->required();
  eval_cmd->add_option("--ref", ev_ref, "Directory of reference PNGs");
  eval_cmd->add_flag("--no-ref", ev_no_ref, "No-reference metrics only");
  eval_cmd->add_option("--csv", ev_csv, "Also write per-image CSV");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "Print a manifest");
  std::string in_manifest;
  inspect_cmd->add_option("manifest", in_manifest, "manifest.json")->required();

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("aquasynth");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  const LogLevel level = log_level == "error" ? LogLevel::error
                         : log_level == "info" ? LogLevel::info
                         : log_level == "debug" ? LogLevel::debug
                                                : LogLevel::warn;
  const Logger logger(err, level);

  auto table = [&]() {
    std::string path = coeffs_path;
    if (path.empty()) {
      if (const char* env = std::getenv("AQUA_COEFFS")) path = env;
    }
    if (path.empty()) throw detail::UsageError("no coefficient table: pass --coeffs or set AQUA_COEFFS");
    return load_coefficient_table(path);
  };

  try {
    if (*ambient_cmd) {
      const WaterType type = water_type_from_string(amb_type);
      const CoefficientTable t = table();
      const ChannelCoefficients& c = t.at(type);
      const AmbientLight light = ambient_light(c, amb_D, amb_bg);
      if (light.clamped) logger.warn("ambient clamped to 1");
      nlohmann::ordered_json j;
      j["water_type"] = std::string(to_string(type));
      j["D"] = amb_D;
      j["B_g"] = amb_bg;
      j["ambient"] = {{"r", light.r}, {"g", light.g}, {"b", light.b}};
      j["clamped"] = light.clamped;
      j["ratios"] = {{"rg", ambient_ratio_rg(c, amb_D)}, {"bg", ambient_ratio_bg(c, amb_D)}};
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*synth_cmd) {
      const WaterType type = water_type_from_string(syn_type);
      const CoefficientTable t = table();
      const ChannelCoefficients& coeffs = t.at(type);

      DatasetConfig sampling;
      sampling.depth_range = {syn_dmin, syn_dmax};
      SynthesisParams p = sample_params(seed.value_or(0), 0, type, sampling);
      if (syn_D) p.surface_depth = *syn_D;
      if (syn_bg) p.green_ambient = *syn_bg;
      validate(p);

      RgbImage clean = read_rgb(syn_clean);
      DepthMap raw = read_depth(syn_depth, syn_depth_scale);
      if (!syn_size.empty()) {
        const auto [w, h] = detail::parse_size(syn_size);
        clean = resize_bilinear(clean, w, h);
        raw = resize_nearest(raw, w, h);
      } else {
        raw = resize_nearest(raw, clean.width(), clean.height());
      }
      const DepthMap depth = rescale_depth(raw, p.min_scene_depth, p.max_scene_depth);
      const AmbientLight light = ambient_light(coeffs, p.surface_depth, p.green_ambient);
      if (light.clamped) logger.warn("ambient clamped to 1");
      write_rgb_png(syn_out, synthesize_image(clean, depth, coeffs, p.surface_depth, light));
      if (!syn_gt_out.empty()) write_rgb_png(syn_gt_out, clean);
      logger.info("wrote " + syn_out);

      nlohmann::ordered_json j;
      j["water_type"] = std::string(to_string(type));
      j["D"] = p.surface_depth;
      j["B_g"] = p.green_ambient;
      j["ambient"] = {{"r", light.r}, {"g", light.g}, {"b", light.b}};
      j["clamped"] = light.clamped;
      j["depth_range"] = {p.min_scene_depth, p.max_scene_depth};
      j["seed"] = p.seed;
      j["size"] = {clean.width(), clean.height()};
      j["image"] = syn_out;
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*dataset_cmd) {
      DatasetConfig cfg = load_dataset_config(ds_config);
      if (seed) cfg.master_seed = *seed;
      if (workers) cfg.workers = *workers;
      const CoefficientTable t = table();
      logger.info("generating dataset into " + cfg.output_dir.string());
      const GenerationResult result = generate_dataset(cfg, t);
      for (const auto& f : result.failures) {
        logger.error(f.source_id + " [" + std::string(to_string(f.water_type)) + "]: " + f.message);
      }
      std::size_t counts[3] = {0, 0, 0};
      for (const auto& r : result.records) ++counts[static_cast<int>(r.split)];
      nlohmann::ordered_json j;
      j["records"] = result.records.size();
      j["failures"] = result.failures.size();
      j["train"] = counts[0];
      j["test"] = counts[1];
      j["holdout"] = counts[2];
      j["manifest"] = (cfg.output_dir / "manifest.json").string();
      out << j.dump(2) << "\n";
      return result.failures.empty() ? 0 : 1;
    }

    if (*eval_cmd) {
      if (!ev_no_ref && ev_ref.empty()) throw detail::UsageError("eval needs --ref or --no-ref");
      std::optional<std::filesystem::path> ref;
      if (!ev_no_ref) ref = ev_ref;
      const MetricReport report = evaluate_directories(ev_pred, ref, workers.value_or(1));
      for (const auto& s : report.images) {
        if (s.error) logger.error(s.name + ": " + *s.error);
      }
      out << detail::report_json(report).dump(2) << "\n";
      if (!ev_csv.empty()) detail::write_report_csv(report, ev_csv);
      return report.failure_count() == 0 ? 0 : 1;
    }

    if (*inspect_cmd) {
      const auto records = read_manifest(in_manifest);
      logger.info(std::to_string(records.size()) + " records");
      out << serialize_manifest(records);
      return 0;
    }
  } catch (const detail::UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    logger.error(e.what());
    return 1;
  }
  return 2;
}

}  // namespace aquasynth::cli
