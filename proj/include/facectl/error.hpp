#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facectl {

enum class ErrorKind {
  Schema,
  Index,
  Overlap,
  Length,
  TopologyMismatch,
  NonFinite,
  Degenerate,
  BadAnchor,
  Resolution,
  Empty,
  DegenerateSocket,
  DegenerateContour,
  ShapeMismatch,
  TimestepOutOfRange,
  MaskRange,
  TooShort,
  BadWindow,
  BadStride,
  TooSmall,
  LengthMismatch,
  SlotMismatch,
  Io,
  Format,
};

std::string_view to_string(ErrorKind kind);

// Base of every error raised by the library. Callers that only care about the
// category switch on kind(); the typed subclasses exist for catch clauses.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& what) : Error(K, what) {}
};

using SchemaError = TypedError<ErrorKind::Schema>;
using IndexError = TypedError<ErrorKind::Index>;
using OverlapError = TypedError<ErrorKind::Overlap>;
using LengthError = TypedError<ErrorKind::Length>;
using TopologyMismatch = TypedError<ErrorKind::TopologyMismatch>;
using NonFiniteError = TypedError<ErrorKind::NonFinite>;
using DegenerateError = TypedError<ErrorKind::Degenerate>;
using BadAnchor = TypedError<ErrorKind::BadAnchor>;
using ResolutionError = TypedError<ErrorKind::Resolution>;
using EmptyError = TypedError<ErrorKind::Empty>;
using DegenerateSocket = TypedError<ErrorKind::DegenerateSocket>;
using DegenerateContour = TypedError<ErrorKind::DegenerateContour>;
using ShapeMismatch = TypedError<ErrorKind::ShapeMismatch>;
using TimestepOutOfRange = TypedError<ErrorKind::TimestepOutOfRange>;
using MaskRangeError = TypedError<ErrorKind::MaskRange>;
using TooShort = TypedError<ErrorKind::TooShort>;
using BadWindow = TypedError<ErrorKind::BadWindow>;
using BadStride = TypedError<ErrorKind::BadStride>;
using TooSmall = TypedError<ErrorKind::TooSmall>;
using LengthMismatch = TypedError<ErrorKind::LengthMismatch>;
using SlotMismatch = TypedError<ErrorKind::SlotMismatch>;
using IoError = TypedError<ErrorKind::Io>;
using FormatError = TypedError<ErrorKind::Format>;

}  // namespace facectl
