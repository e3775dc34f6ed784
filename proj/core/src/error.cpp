#include "con360/error.hpp"

namespace con360 {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kBounds: return "bounds";
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kInvalidData: return "invalid_data";
    case ErrorKind::kAspect: return "aspect";
    case ErrorKind::kProjectionDomain: return "projection_domain";
    case ErrorKind::kNoBoundary: return "no_boundary";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kDegenerateCentroid: return "degenerate_centroid";
    case ErrorKind::kUndefinedBoundary: return "undefined_boundary";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kInsufficientSamples: return "insufficient_samples";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorKind::kUnsupportedLayout: return "unsupported_layout";
    case ErrorKind::kUnsupportedVersion: return "unsupported_version";
    case ErrorKind::kMalformedHeader: return "malformed_header";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace con360
