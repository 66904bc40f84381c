#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ksep {

/// Base of all library errors; `name()` is the stable identifier printed by the CLI.
class Error : public std::runtime_error {
  public:
    Error(std::string name, const std::string& msg)
      : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

  private:
    std::string name_;
};

#define KSEP_DEFINE_ERROR(NAME)                                                \
    struct NAME : Error {                                                      \
        explicit NAME(const std::string& msg) : Error(#NAME, msg) {}           \
    }

KSEP_DEFINE_ERROR(ConfigError);
KSEP_DEFINE_ERROR(NumericalDomainError);
KSEP_DEFINE_ERROR(UnknownModelError);
KSEP_DEFINE_ERROR(HyperbolicityError);
KSEP_DEFINE_ERROR(NotTypeOneError);
KSEP_DEFINE_ERROR(UnsupportedSpectrumError);
KSEP_DEFINE_ERROR(EmptySampleSetError);
KSEP_DEFINE_ERROR(PathIntegralError);
KSEP_DEFINE_ERROR(FitError);
KSEP_DEFINE_ERROR(NoCrossingError);
KSEP_DEFINE_ERROR(MissingArtifactError);

#undef KSEP_DEFINE_ERROR

}  // namespace ksep
