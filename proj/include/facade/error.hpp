#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facade {

/// Categories for every failure the toolkit reports. The CLI maps these to
/// exit codes and the `error` field of report.json.
enum class ErrorCode {
  ParseFailure,
  DuplicateId,
  DuplicateColor,
  NonContiguousIds,
  MissingWall,
  UnknownColor,
  AmbiguousColor,
  UnknownClass,
  DimensionMismatch,
  NoBackground,
  NoInstances,
  InvalidArgument,
  LayoutOverflow,
  MissingTemplate,
  IoError,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DuplicateColor: return "DuplicateColor";
    case ErrorCode::NonContiguousIds: return "NonContiguousIds";
    case ErrorCode::MissingWall: return "MissingWall";
    case ErrorCode::UnknownColor: return "UnknownColor";
    case ErrorCode::AmbiguousColor: return "AmbiguousColor";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoBackground: return "NoBackground";
    case ErrorCode::NoInstances: return "NoInstances";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LayoutOverflow: return "LayoutOverflow";
    case ErrorCode::MissingTemplate: return "MissingTemplate";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace facade
