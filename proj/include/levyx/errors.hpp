#pragma once

#include <stdexcept>
#include <string>

namespace levyx {

/// Base of every engine failure. `name()` is the stable identifier surfaced by
/// the CLI (e.g. "StripViolation"), `what()` carries the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& message)
      : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define LEVYX_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// Model construction and evaluation.
LEVYX_DEFINE_ERROR(InvalidModel);
LEVYX_DEFINE_ERROR(StripViolation);
LEVYX_DEFINE_ERROR(StripTooNarrow);
LEVYX_DEFINE_ERROR(NoRoot);

// Quadrature.
LEVYX_DEFINE_ERROR(NonPositiveInput);
LEVYX_DEFINE_ERROR(InvalidContour);
LEVYX_DEFINE_ERROR(NoConvergence);
LEVYX_DEFINE_ERROR(NaNEncountered);
LEVYX_DEFINE_ERROR(DimensionTooLarge);

// Digital pricing.
LEVYX_DEFINE_ERROR(InvalidSchedule);
LEVYX_DEFINE_ERROR(InvalidPayoff);
LEVYX_DEFINE_ERROR(NoFeasibleOffsets);
LEVYX_DEFINE_ERROR(ImaginaryResidue);

// Contracts.
LEVYX_DEFINE_ERROR(InvalidContract);
LEVYX_DEFINE_ERROR(UnsolvedThresholds);
LEVYX_DEFINE_ERROR(CapExceeded);

// Gaussian reference.
LEVYX_DEFINE_ERROR(NotPSD);
LEVYX_DEFINE_ERROR(UnsupportedContract);

// Monte Carlo.
LEVYX_DEFINE_ERROR(UnsupportedModel);
LEVYX_DEFINE_ERROR(NestingTooDeep);

// Spec files.
LEVYX_DEFINE_ERROR(SpecError);

#undef LEVYX_DEFINE_ERROR

}  // namespace levyx
