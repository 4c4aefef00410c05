#pragma once

// Forward-only reference kernels for prior fusion: squeeze-style adaptive
// prior weighting and instance-normalized feature modulation. Parameters are
// supplied from outside (see load_named_arrays); nothing here is trained.

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"

namespace aquasynth {

inline constexpr double kInstanceNormEpsilon = 1e-5;

using Shape4 = std::array<std::size_t, 4>;

inline std::string shape_string(const Shape4& s) {
  return "[" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," + std::to_string(s[2]) +
         "," + std::to_string(s[3]) + "]";
}

/// N×C×H×W block of finite doubles, row-major.
class FeatureTensor {
 public:
  FeatureTensor() = default;
  explicit FeatureTensor(Shape4 shape, double fill = 0.0)
      : shape_(shape), data_(count(shape), fill) {
    check_dims();
  }
  FeatureTensor(Shape4 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    check_dims();
    if (data_.size() != count(shape_)) {
      throw ShapeMismatch("tensor data size " + std::to_string(data_.size()) + " for shape " +
                          shape_string(shape_));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw InvalidParams("tensor holds a non-finite value");
    }
  }

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t batch() const noexcept { return shape_[0]; }
  std::size_t channels() const noexcept { return shape_[1]; }
  std::size_t height() const noexcept { return shape_[2]; }
  std::size_t width() const noexcept { return shape_[3]; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t plane_size() const noexcept { return shape_[2] * shape_[3]; }

  double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }

  /// Contiguous H×W slice of sample n, channel c.
  std::span<double> slice(std::size_t n, std::size_t c) {
    return std::span<double>(data_).subspan((n * shape_[1] + c) * plane_size(), plane_size());
  }
  std::span<const double> slice(std::size_t n, std::size_t c) const {
    return std::span<const double>(data_).subspan((n * shape_[1] + c) * plane_size(),
                                                  plane_size());
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  static std::size_t count(const Shape4& s) { return s[0] * s[1] * s[2] * s[3]; }
  void check_dims() const {
    for (std::size_t d : shape_) {
      if (d == 0) throw ShapeMismatch("zero dimension in shape " + shape_string(shape_));
    }
  }

  Shape4 shape_{1, 1, 1, 1};
  std::vector<double> data_ = std::vector<double>(1, 0.0);
};

inline void require_same_shape(const FeatureTensor& a, const FeatureTensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeMismatch(std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
}

/// (S - mean) / (std + eps) over each (n, c) slice, population std.
inline FeatureTensor instance_normalize(const FeatureTensor& s,
                                        double epsilon = kInstanceNormEpsilon) {
  if (s.plane_size() < 2) throw ShapeMismatch("instance_normalize needs H*W >= 2");
  FeatureTensor out = s;
  for (std::size_t n = 0; n < s.batch(); ++n) {
    for (std::size_t c = 0; c < s.channels(); ++c) {
      const auto src = s.slice(n, c);
      const double count = static_cast<double>(src.size());
      const double mean = std::accumulate(src.begin(), src.end(), 0.0) / count;
      double var = 0.0;
      for (double v : src) var += (v - mean) * (v - mean);
      const double denom = std::sqrt(var / count) + epsilon;
      auto dst = out.slice(n, c);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - mean) / denom;
    }
  }
  return out;
}

struct ModulationPair {
  FeatureTensor gamma;
  FeatureTensor beta;
};

/// S * (gamma + 1) + beta, elementwise.
inline FeatureTensor sft_modulate(const FeatureTensor& s, const ModulationPair& mods) {
  require_same_shape(s, mods.gamma, "sft_modulate gamma");
  require_same_shape(s, mods.beta, "sft_modulate beta");
  FeatureTensor out = s;
  auto o = out.values();
  const auto g = mods.gamma.values();
  const auto b = mods.beta.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = o[i] * (g[i] + 1.0) + b[i];
  return out;
}

/// Fully connected layer, weight stored out×in row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  void check() const {
    if (weight.size() != inputs * outputs || bias.size() != outputs) {
      throw ShapeMismatch("dense layer " + std::to_string(outputs) + "x" +
                          std::to_string(inputs) + " has " + std::to_string(weight.size()) +
                          " weights and " + std::to_string(bias.size()) + " biases");
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    check();
    if (x.size() != inputs) {
      throw ShapeMismatch("dense layer expects " + std::to_string(inputs) + " inputs, got " +
                          std::to_string(x.size()));
    }
    std::vector<double> y(outputs);
    for (std::size_t o = 0; o < outputs; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < inputs; ++i) acc += weight[o * inputs + i] * x[i];
      y[o] = acc;
    }
    return y;
  }
};

/// Mean over H×W, giving N×C×1×1.
inline FeatureTensor global_average_pool(const FeatureTensor& x) {
  FeatureTensor out({x.batch(), x.channels(), 1, 1});
  for (std::size_t n = 0; n < x.batch(); ++n)
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const auto s = x.slice(n, c);
      out.at(n, c, 0, 0) =
          std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    }
  return out;
}

/// 1×1 convolution: the same dense channel map applied at every pixel.
inline FeatureTensor project_channels(const FeatureTensor& x, const DenseLayer& map) {
  map.check();
  if (map.inputs != x.channels()) {
    throw ShapeMismatch("channel projection expects " + std::to_string(map.inputs) +
                        " channels, got " + std::to_string(x.channels()));
  }
  FeatureTensor out({x.batch(), map.outputs, x.height(), x.width()});
  std::vector<double> px(x.channels());
  for (std::size_t n = 0; n < x.batch(); ++n)
    for (std::size_t h = 0; h < x.height(); ++h)
      for (std::size_t w = 0; w < x.width(); ++w) {
        for (std::size_t c = 0; c < x.channels(); ++c) px[c] = x.at(n, c, h, w);
        const auto y = map.apply(px);
        for (std::size_t o = 0; o < map.outputs; ++o) out.at(n, o, h, w) = y[o];
      }
  return out;
}

/// Pooled descriptor of one input: GAP(project_channels(x)).
inline FeatureTensor channel_descriptor(const FeatureTensor& x, const DenseLayer& projection) {
  return global_average_pool(project_channels(x, projection));
}

/// One scalar weight in (0, 1) per prior per batch item.
struct PriorWeightVector {
  std::size_t batch = 0;
  std::size_t priors = 0;
  std::vector<double> values;

  double at(std::size_t n, std::size_t prior) const { return values[n * priors + prior]; }
};

struct AdaptiveWeightingParams {
  DenseLayer fc1;
  DenseLayer fc2;
};

/// sigmoid(fc2(relu(fc1(concat(descriptors))))) per batch item. Each
/// descriptor is N×C_i×1×1; the concatenated length must equal fc1.inputs and
/// fc2.outputs is the number of priors.
inline PriorWeightVector adaptive_weights(const std::vector<FeatureTensor>& descriptors,
                                          const AdaptiveWeightingParams& params) {
  if (descriptors.empty()) throw ShapeMismatch("adaptive_weights needs descriptors");
  params.fc1.check();
  params.fc2.check();
  if (params.fc2.inputs != params.fc1.outputs) {
    throw ShapeMismatch("fc2 inputs do not match fc1 outputs");
  }
  const std::size_t batch = descriptors.front().batch();
  std::size_t total = 0;
  for (const auto& d : descriptors) {
    if (d.batch() != batch || d.height() != 1 || d.width() != 1) {
      throw ShapeMismatch("descriptor shape " + shape_string(d.shape()) +
                          " is not [N,C,1,1] with a common N");
    }
    total += d.channels();
  }
  if (total != params.fc1.inputs) {
    throw ShapeMismatch("concatenated descriptor length " + std::to_string(total) +
                        " != fc1 inputs " + std::to_string(params.fc1.inputs));
  }

  PriorWeightVector out{batch, params.fc2.outputs, {}};
  out.values.reserve(batch * out.priors);
  std::vector<double> concat;
  concat.reserve(total);
  for (std::size_t n = 0; n < batch; ++n) {
    concat.clear();
    for (const auto& d : descriptors)
      for (std::size_t c = 0; c < d.channels(); ++c) concat.push_back(d.at(n, c, 0, 0));
    auto hidden = params.fc1.apply(concat);
    for (double& h : hidden) h = std::max(h, 0.0);
    for (double z : params.fc2.apply(hidden)) out.values.push_back(1.0 / (1.0 + std::exp(-z)));
  }
  return out;
}

/// Scales prior i of batch item n by weights.at(n, i).
inline std::vector<FeatureTensor> apply_prior_weights(const std::vector<FeatureTensor>& priors,
                                                      const PriorWeightVector& weights) {
  if (priors.size() != weights.priors) {
    throw ShapeMismatch(std::to_string(priors.size()) + " priors but " +
                        std::to_string(weights.priors) + " weights");
  }
  std::vector<FeatureTensor> out;
  out.reserve(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    if (priors[i].batch() != weights.batch) throw ShapeMismatch("prior batch size mismatch");
    FeatureTensor p = priors[i];
    for (std::size_t n = 0; n < p.batch(); ++n) {
      const double w = weights.at(n, i);
      for (std::size_t c = 0; c < p.channels(); ++c)
        for (double& v : p.slice(n, c)) v *= w;
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Parameter fixture: {"name": {"shape": [...], "data": [...]}, ...}.
struct NamedArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

using NamedArrays = std::map<std::string, NamedArray>;

inline NamedArrays parse_named_arrays(const nlohmann::json& doc) {
  if (!doc.is_object()) throw MalformedFile("parameter fixture must be a JSON object");
  NamedArrays arrays;
  for (const auto& [name, v] : doc.items()) {
    try {
      NamedArray a;
      a.shape = v.at("shape").get<std::vector<std::size_t>>();
      a.data = v.at("data").get<std::vector<double>>();
      std::size_t expected = 1;
      for (std::size_t d : a.shape) expected *= d;
      if (a.shape.empty() || expected != a.data.size()) {
        throw ShapeMismatch("array '" + name + "' has " + std::to_string(a.data.size()) +
                            " values for its declared shape");
      }
      arrays.emplace(name, std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedFile("array '" + name + "': " + e.what());
    }
  }
  return arrays;
}

inline NamedArrays load_named_arrays(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(path.string() + ": " + e.what());
  }
  return parse_named_arrays(doc);
}

/// Builds a dense layer from `<name>.weight` ([out, in]) and `<name>.bias` ([out]).
inline DenseLayer dense_from_arrays(const NamedArrays& arrays, const std::string& name) {
  const auto w = arrays.find(name + ".weight");
  const auto b = arrays.find(name + ".bias");
  if (w == arrays.end() || b == arrays.end()) {
    throw MalformedFile("fixture lacks " + name + ".weight / " + name + ".bias");
  }
  if (w->second.shape.size() != 2 || b->second.shape.size() != 1 ||
      b->second.shape[0] != w->second.shape[0]) {
    throw ShapeMismatch("layer '" + name + "' weight must be [out,in] and bias [out]");
  }
  DenseLayer layer{w->second.shape[1], w->second.shape[0], w->second.data, b->second.data};
  layer.check();
  return layer;
}

inline AdaptiveWeightingParams adaptive_params_from_arrays(const NamedArrays& arrays) {
  return {dense_from_arrays(arrays, "fc1"), dense_from_arrays(arrays, "fc2")};
}

inline FeatureTensor tensor_from_array(const NamedArray& a) {
  if (a.shape.size() != 4) throw ShapeMismatch("tensor arrays must be 4-D");
  return FeatureTensor({a.shape[0], a.shape[1], a.shape[2], a.shape[3]}, a.data);
}

}  // namespace aquasynth
