#pragma once

#include <stdexcept>
#include <string>

namespace aquasynth {

/// Base of every error raised by the library. Catch this to handle all of them.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AQUASYNTH_DEFINE_ERROR(Name)            \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(std::string(#Name ": ") + what) {} \
  };

AQUASYNTH_DEFINE_ERROR(MalformedFile)
AQUASYNTH_DEFINE_ERROR(OutOfRange)
AQUASYNTH_DEFINE_ERROR(DimensionMismatch)
AQUASYNTH_DEFINE_ERROR(InvalidParams)
AQUASYNTH_DEFINE_ERROR(DegenerateTransmission)
AQUASYNTH_DEFINE_ERROR(DegenerateDepth)
AQUASYNTH_DEFINE_ERROR(NonSquare)
AQUASYNTH_DEFINE_ERROR(IoError)
AQUASYNTH_DEFINE_ERROR(SchemaVersionMismatch)
AQUASYNTH_DEFINE_ERROR(ConfigError)
AQUASYNTH_DEFINE_ERROR(ImageTooSmall)
AQUASYNTH_DEFINE_ERROR(ShapeMismatch)

#undef AQUASYNTH_DEFINE_ERROR

class MissingWaterType : public Error {
 public:
  explicit MissingWaterType(std::string name)
      : Error("MissingWaterType: " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NonPositiveCoefficient : public Error {
 public:
  NonPositiveCoefficient(std::string type, std::string field)
      : Error("NonPositiveCoefficient: " + type + "." + field),
        type_(std::move(type)),
        field_(std::move(field)) {}
  const std::string& type() const noexcept { return type_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string type_;
  std::string field_;
};

}  // namespace aquasynth
