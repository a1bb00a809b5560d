#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdv {

enum class ErrorKind {
  // validation
  SingleClass,
  ClassTooSmall,
  EmptyClass,
  AllDimensionsConstant,
  LabelMismatch,
  InvalidSpec,
  WrongDimension,
  ShapeMismatch,
  InvalidInput,
  LayerOutOfRange,
  NoClassImages,
  TooFewPoints,
  DegenerateSpectrum,
  ParseError,
  NonFiniteValue,
  MissingLabelColumn,
  BadMagic,
  TruncatedFile,
  DimensionMismatch,
  UnsupportedVersion,
  // numeric
  NonFiniteLoss,
  // io
  IoError,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory { Io, Validation, Numeric };

std::string_view to_string(ErrorKind kind);
ErrorCategory category(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string &detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace gdv
