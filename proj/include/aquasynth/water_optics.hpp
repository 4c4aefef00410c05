#pragma once

// Jerlov water types and their per-channel inherent optical properties.
//
// Channels map to fixed reference wavelengths: r = 650 nm, g = 525 nm,
// b = 450 nm. Coefficients are in 1/m.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

#include "errors.hpp"

namespace aquasynth {

enum class Channel : std::uint8_t { r = 0, g = 1, b = 2 };

inline constexpr std::array<Channel, 3> kChannels = {Channel::r, Channel::g, Channel::b};

enum class WaterType : std::uint8_t { I, IA, IB, II, III, C1, C3, C5, C7, C9 };

enum class WaterClass : std::uint8_t { open_ocean, coastal };

inline constexpr std::array<WaterType, 10> kAllWaterTypes = {
    WaterType::I,  WaterType::IA, WaterType::IB, WaterType::II, WaterType::III,
    WaterType::C1, WaterType::C3, WaterType::C5, WaterType::C7, WaterType::C9};

inline constexpr std::string_view to_string(WaterType t) {
  constexpr std::array<std::string_view, 10> names = {"I",  "IA", "IB", "II", "III",
                                                      "1C", "3C", "5C", "7C", "9C"};
  return names[static_cast<std::size_t>(t)];
}

inline constexpr std::string_view to_string(Channel c) {
  constexpr std::array<std::string_view, 3> names = {"r", "g", "b"};
  return names[static_cast<std::size_t>(c)];
}

inline std::optional<WaterType> parse_water_type(std::string_view name) {
  for (WaterType t : kAllWaterTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

/// Like parse_water_type, but throws InvalidParams for unknown names.
inline WaterType water_type_from_string(std::string_view name) {
  if (auto t = parse_water_type(name)) return *t;
  throw InvalidParams("unknown water type '" + std::string(name) + "'");
}

inline constexpr WaterClass water_class(WaterType t) {
  return static_cast<std::uint8_t>(t) <= static_cast<std::uint8_t>(WaterType::III)
             ? WaterClass::open_ocean
             : WaterClass::coastal;
}

/// Absorption (a) and scattering (b) coefficients at the three reference
/// wavelengths.
struct ChannelCoefficients {
  double a_r = 0.0;
  double a_g = 0.0;
  double a_b = 0.0;
  double b_r = 0.0;
  double b_g = 0.0;
  double b_b = 0.0;

  constexpr double absorption(Channel c) const {
    switch (c) {
      case Channel::r: return a_r;
      case Channel::g: return a_g;
      case Channel::b: return a_b;
    }
    return 0.0;
  }

  constexpr double scattering(Channel c) const {
    switch (c) {
      case Channel::r: return b_r;
      case Channel::g: return b_g;
      case Channel::b: return b_b;
    }
    return 0.0;
  }

  friend bool operator==(const ChannelCoefficients&, const ChannelCoefficients&) = default;
};

/// Total attenuation a_c + b_c.
constexpr double beta(const ChannelCoefficients& coeffs, Channel c) {
  return coeffs.absorption(c) + coeffs.scattering(c);
}

/// Throws NonPositiveCoefficient naming the first field that is not a
/// strictly positive finite number.
inline void validate(const ChannelCoefficients& coeffs, std::string_view type_name) {
  const std::array<std::pair<const char*, double>, 6> fields = {{{"a_r", coeffs.a_r},
                                                                 {"a_g", coeffs.a_g},
                                                                 {"a_b", coeffs.a_b},
                                                                 {"b_r", coeffs.b_r},
                                                                 {"b_g", coeffs.b_g},
                                                                 {"b_b", coeffs.b_b}}};
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw NonPositiveCoefficient(std::string(type_name), name);
    }
  }
}

/// Complete mapping from every WaterType to its coefficients. Immutable once
/// built; construct through from_json / load_coefficient_table.
class CoefficientTable {
 public:
  const ChannelCoefficients& at(WaterType t) const { return entries_.at(t); }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<WaterType, ChannelCoefficients>& entries() const noexcept { return entries_; }

  static CoefficientTable from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw MalformedFile("coefficient file must hold a JSON object");

    for (const auto& [key, value] : doc.items()) {
      if (!parse_water_type(key)) throw MalformedFile("unknown water type key '" + key + "'");
    }

    CoefficientTable table;
    std::set<std::string> sources;
    for (WaterType t : kAllWaterTypes) {
      const std::string name(to_string(t));
      auto it = doc.find(name);
      if (it == doc.end()) throw MissingWaterType(name);
      if (!it->is_object()) throw MalformedFile("entry '" + name + "' is not an object");

      auto field = [&](const char* key) {
        auto f = it->find(key);
        if (f == it->end() || !f->is_number()) {
          throw MalformedFile("entry '" + name + "' lacks numeric field '" + key + "'");
        }
        return f->get<double>();
      };
      ChannelCoefficients c{field("a_r"), field("a_g"), field("a_b"),
                            field("b_r"), field("b_g"), field("b_b")};
      validate(c, name);
      table.entries_.emplace(t, c);

      if (auto s = it->find("source"); s != it->end()) {
        if (!s->is_string()) throw MalformedFile("entry '" + name + "' has non-string source");
        sources.insert(s->get<std::string>());
      }
    }

    for (const auto& s : sources) {
      if (!table.provenance_.empty()) table.provenance_ += "; ";
      table.provenance_ += s;
    }
    return table;
  }

  nlohmann::json to_json() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [t, c] : entries_) {
      doc[std::string(to_string(t))] = {{"a_r", c.a_r}, {"a_g", c.a_g}, {"a_b", c.a_b},
                                        {"b_r", c.b_r}, {"b_g", c.b_g}, {"b_b", c.b_b}};
      if (!provenance_.empty()) doc[std::string(to_string(t))]["source"] = provenance_;
    }
    return doc;
  }

  friend bool operator==(const CoefficientTable&, const CoefficientTable&) = default;

 private:
  std::map<WaterType, ChannelCoefficients> entries_;
  std::string provenance_;
};

inline CoefficientTable load_coefficient_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open coefficient file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(path.string() + ": " + e.what());
  }
  return CoefficientTable::from_json(doc);
}

}  // namespace aquasynth
