#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace sgnn {

using Index = Eigen::Index;

// Column-major dense matrix; the default currency for signals and weights.
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// N x F matrix of per-vertex values.
using GraphSignal = Matrix;

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kIndexOutOfRange,
  kIsolatedVertex,
  kDensityExceeded,
  kNotConnected,
  kConvergence,
  kParse,
  kIo,
  kNumeric,
  kStaleCache,
  kInsufficientRuns,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception; `code()` is
// stable and is what the CLI serializes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) fail(code, message);
}

}  // namespace sgnn
