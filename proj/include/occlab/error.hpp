#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occlab {

enum class ErrorKind {
  Parameter,
  Capability,
  Numeric,
  Alignment,
  Model,
  Resolution,
  Coverage,
  Config,
  Oracle,
  Simulation,
  Fit,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every exception thrown by the library. The kind lets front ends
/// map failures to exit codes without a cascade of catch blocks.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define OCCLAB_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

OCCLAB_DEFINE_ERROR(ParameterError, Parameter)
OCCLAB_DEFINE_ERROR(CapabilityError, Capability)
OCCLAB_DEFINE_ERROR(NumericError, Numeric)
OCCLAB_DEFINE_ERROR(AlignmentError, Alignment)
OCCLAB_DEFINE_ERROR(ModelError, Model)
OCCLAB_DEFINE_ERROR(ResolutionError, Resolution)
OCCLAB_DEFINE_ERROR(CoverageError, Coverage)
OCCLAB_DEFINE_ERROR(ConfigError, Config)
OCCLAB_DEFINE_ERROR(OracleError, Oracle)
OCCLAB_DEFINE_ERROR(SimulationError, Simulation)
OCCLAB_DEFINE_ERROR(FitError, Fit)
OCCLAB_DEFINE_ERROR(IoError, Io)

#undef OCCLAB_DEFINE_ERROR

}  // namespace occlab
