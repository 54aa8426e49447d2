#pragma once

#include <stdexcept>
#include <string>

namespace specvo {

// Mirrors the status codes of the C API (specvo.h).
enum class ErrorCode {
  kInputDomain = 1,
  kContract = 2,
  kDegenerateBlock = 3,
  kRegistrationFailure = 4,
  kMatchingFailure = 5,
  kOptimizerFailure = 6,
  kSceneCoverage = 7,
  kIo = 8,
  kDegenerateTrajectory = 9,
  kAssociation = 10,
  kParse = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Registration failed in one of its two fusion stages.
class RegistrationError : public Error {
 public:
  enum class Stage { kRotationScale, kTranslation };

  RegistrationError(Stage stage, const std::string& what)
      : Error(ErrorCode::kRegistrationFailure, what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace specvo
