#include "reidhtl/errors.hpp"

namespace reidhtl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoSimilarPairs: return "NoSimilarPairs";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPsd: return "NotPsd";
    case ErrorKind::DegenerateScatter: return "DegenerateScatter";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::SingularScatter: return "SingularScatter";
    case ErrorKind::NegativeQuadraticForm: return "NegativeQuadraticForm";
    case ErrorKind::QueryIdentityMissing: return "QueryIdentityMissing";
    case ErrorKind::EmptyGallery: return "EmptyGallery";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace reidhtl
