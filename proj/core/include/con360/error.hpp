#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace con360 {

// Every failure raised by the library carries one of these kinds. The CLI maps
// them onto its exit-code taxonomy.
enum class ErrorKind {
  kBounds,
  kInvalidInput,
  kInvalidData,
  kAspect,
  kProjectionDomain,
  kNoBoundary,
  kParameter,
  kDegenerateCentroid,
  kUndefinedBoundary,
  kShape,
  kDomain,
  kConfiguration,
  kInsufficientSamples,
  kIo,
  kTruncated,
  kUnsupportedDtype,
  kUnsupportedLayout,
  kUnsupportedVersion,
  kMalformedHeader,
  kSchema,
  kParse,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace con360
