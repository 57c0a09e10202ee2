#pragma once

#include <stdexcept>
#include <string>

namespace panelseg {

// Base of every error thrown by the library. Two families matter for
// callers: InvalidInput (malformed arguments, specs, config or files;
// CLI exit code 2) and EstimatorFailure (an estimation procedure could
// not produce a result; CLI exit code 3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
  using Error::Error;
};

struct EstimatorFailure : Error {
  using Error::Error;
};

struct InvalidSpec : InvalidInput { using InvalidInput::InvalidInput; };
struct InvalidArgument : InvalidInput { using InvalidInput::InvalidInput; };
struct InvalidPanelLength : InvalidInput { using InvalidInput::InvalidInput; };
struct InvalidWeights : InvalidInput { using InvalidInput::InvalidInput; };
struct InsufficientPanels : InvalidInput { using InvalidInput::InvalidInput; };
struct InvalidTrainingWindow : InvalidInput { using InvalidInput::InvalidInput; };
struct NonPositiveVariance : InvalidInput { using InvalidInput::InvalidInput; };
struct InvalidConfig : InvalidInput { using InvalidInput::InvalidInput; };
struct UnsupportedGamma : InvalidInput { using InvalidInput::InvalidInput; };
struct OutsideValidity : InvalidInput { using InvalidInput::InvalidInput; };
struct VanishingChange : InvalidInput { using InvalidInput::InvalidInput; };
struct IoError : InvalidInput { using InvalidInput::InvalidInput; };

struct SolverFailure : EstimatorFailure { using EstimatorFailure::EstimatorFailure; };
struct AmbiguousMaximum : EstimatorFailure { using EstimatorFailure::EstimatorFailure; };
struct TargetCountUnreachable : EstimatorFailure { using EstimatorFailure::EstimatorFailure; };

}  // namespace panelseg
