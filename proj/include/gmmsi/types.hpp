#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gmmsi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Failure categories shared by the C++ core and the C API.
enum class ErrorCode : int {
  kInvalidInput = 1,       ///< malformed argument (NaN entries, bad ranges, ...)
  kDimensionMismatch = 2,
  kModelValidation = 3,    ///< model violates a structural invariant
  kConfig = 4,             ///< configuration file could not be parsed
  kIo = 5,
  kUnsupported = 6,        ///< request is valid but not applicable to this model
  kUndefined = 7,          ///< quantity is undefined for the given data (e.g. slope)
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Zero-based class label pair (C1 = i + 1, C2 = k + 1 in one-based notation).
struct ClassPair {
  int i = 0;
  int k = 0;
  auto operator<=>(const ClassPair&) const = default;
};

/// Ordered pair of class pairs (i,k,j,l).
struct Quadruple {
  ClassPair a;
  ClassPair b;
  auto operator<=>(const Quadruple&) const = default;
};

}  // namespace gmmsi
