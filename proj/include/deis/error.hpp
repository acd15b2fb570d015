// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace deis {

enum class ErrorCode {
  kInvalidArgument = 1,
  kOutOfRange,
  kDimensionMismatch,
  kDegenerateDensity,
  kSingularReparameterisation,
  kMissingProfile,
  kDuplicateNodes,
  kTableMismatch,
  kNonFinite,
  kConfig,
  kIo,
  kNotSingleGaussian,
};

/// Exception type thrown by every module; the C API maps `code()` onto
/// `deis_status`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for failures that originate in the numerics rather than in the inputs.
inline bool is_numerical(ErrorCode code) {
  return code == ErrorCode::kNonFinite ||
         code == ErrorCode::kDegenerateDensity ||
         code == ErrorCode::kSingularReparameterisation;
}

}  // namespace deis
