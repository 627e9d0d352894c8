#pragma once

#include <stdexcept>
#include <string>

namespace berrydyn {

// One exception type per failure condition so callers can catch precisely;
// code() carries a stable machine-readable tag for manifests and logs.
enum class ErrorCode {
  degenerate,
  gauge_singular,
  bad_actions,
  step_too_large,
  nonfinite,
  no_orbit,
  parse_error,
  validation_error,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::degenerate: return "DEGENERATE";
    case ErrorCode::gauge_singular: return "GAUGE_SINGULAR";
    case ErrorCode::bad_actions: return "BAD_ACTIONS";
    case ErrorCode::step_too_large: return "STEP_TOO_LARGE";
    case ErrorCode::nonfinite: return "NONFINITE";
    case ErrorCode::no_orbit: return "NO_ORBIT";
    case ErrorCode::parse_error: return "PARSE_ERROR";
    case ErrorCode::validation_error: return "VALIDATION_ERROR";
  }
  return "UNKNOWN";
}

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct DegenerateError : SimError {
  explicit DegenerateError(const std::string& w) : SimError(ErrorCode::degenerate, w) {}
};

struct GaugeSingularError : SimError {
  explicit GaugeSingularError(const std::string& w) : SimError(ErrorCode::gauge_singular, w) {}
};

struct BadActionsError : SimError {
  explicit BadActionsError(const std::string& w) : SimError(ErrorCode::bad_actions, w) {}
};

struct StepTooLargeError : SimError {
  explicit StepTooLargeError(const std::string& w) : SimError(ErrorCode::step_too_large, w) {}
};

struct NonFiniteError : SimError {
  explicit NonFiniteError(const std::string& w) : SimError(ErrorCode::nonfinite, w) {}
};

struct NoOrbitError : SimError {
  explicit NoOrbitError(const std::string& w) : SimError(ErrorCode::no_orbit, w) {}
};

struct ParseError : SimError {
  explicit ParseError(const std::string& w) : SimError(ErrorCode::parse_error, w) {}
};

struct ValidationError : SimError {
  explicit ValidationError(const std::string& w) : SimError(ErrorCode::validation_error, w) {}
};

}  // namespace berrydyn
