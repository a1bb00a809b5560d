#include "gdv/error.hpp"

namespace gdv {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::ClassTooSmall: return "ClassTooSmall";
    case ErrorKind::EmptyClass: return "EmptyClass";
    case ErrorKind::AllDimensionsConstant: return "AllDimensionsConstant";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::WrongDimension: return "WrongDimension";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::NoClassImages: return "NoClassImages";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IoError: return ErrorCategory::Io;
    case ErrorKind::NonFiniteLoss: return ErrorCategory::Numeric;
    default: return ErrorCategory::Validation;
  }
}

Error::Error(ErrorKind kind, const std::string &detail)
    : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      detail_(detail) {}

}  // namespace gdv
