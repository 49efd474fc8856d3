#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reidhtl {

enum class ErrorKind {
  DimensionMismatch,
  NoSimilarPairs,
  NotSymmetric,
  NotPsd,
  DegenerateScatter,
  NonFiniteObjective,
  SingularScatter,
  NegativeQuadraticForm,
  QueryIdentityMissing,
  EmptyGallery,
  InvalidSpec,
  InvalidArgument,
  RankDeficient,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` lets callers (and the CLI's
/// exit-code mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace reidhtl
