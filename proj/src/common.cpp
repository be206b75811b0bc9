#include "sgnn/common.hpp"

namespace sgnn {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kDimensionMismatch:
      return "dimension_mismatch";
    case ErrorCode::kIndexOutOfRange:
      return "index_out_of_range";
    case ErrorCode::kIsolatedVertex:
      return "isolated_vertex";
    case ErrorCode::kDensityExceeded:
      return "density_exceeded";
    case ErrorCode::kNotConnected:
      return "not_connected";
    case ErrorCode::kConvergence:
      return "convergence";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kNumeric:
      return "numeric";
    case ErrorCode::kStaleCache:
      return "stale_cache";
    case ErrorCode::kInsufficientRuns:
      return "insufficient_runs";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sgnn
