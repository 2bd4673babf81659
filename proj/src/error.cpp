#include "facectl/error.hpp"

namespace facectl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Index: return "IndexError";
    case ErrorKind::Overlap: return "OverlapError";
    case ErrorKind::Length: return "LengthError";
    case ErrorKind::TopologyMismatch: return "TopologyMismatch";
    case ErrorKind::NonFinite: return "NonFiniteError";
    case ErrorKind::Degenerate: return "DegenerateError";
    case ErrorKind::BadAnchor: return "BadAnchor";
    case ErrorKind::Resolution: return "ResolutionError";
    case ErrorKind::Empty: return "EmptyError";
    case ErrorKind::DegenerateSocket: return "DegenerateSocket";
    case ErrorKind::DegenerateContour: return "DegenerateContour";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::TimestepOutOfRange: return "TimestepOutOfRange";
    case ErrorKind::MaskRange: return "MaskRangeError";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::BadWindow: return "BadWindow";
    case ErrorKind::BadStride: return "BadStride";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SlotMismatch: return "SlotMismatch";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
  }
  return "Error";
}

}  // namespace facectl
