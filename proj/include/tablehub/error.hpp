#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tablehub {

enum class Errc {
  // table-core
  LengthMismatch,
  DuplicateColumn,
  TypeViolation,
  RowOutOfBounds,
  UnknownColumn,
  InvalidName,
  // ingest
  EmptyInput,
  RaggedRow,
  UnterminatedQuote,
  SchemaMismatch,
  MalformedDocument,
  UnsupportedShape,
  NestedValue,
  // exprlang
  SyntaxError,
  TypeMismatch,
  // transform / pivot
  ValidationFailed,
  DuplicateSpreadKey,
  NameCollision,
  StepFailed,
  MalformedScript,
  // exchange
  NoCommonFormat,
  UnknownField,
  // bridge
  MalformedMessage,
  UnsupportedVersion,
  UnknownKind,
  // session
  UnknownDataset,
  MalformedProject,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DuplicateColumn: return "DuplicateColumn";
    case Errc::TypeViolation: return "TypeViolation";
    case Errc::RowOutOfBounds: return "RowOutOfBounds";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::InvalidName: return "InvalidName";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::UnterminatedQuote: return "UnterminatedQuote";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::UnsupportedShape: return "UnsupportedShape";
    case Errc::NestedValue: return "NestedValue";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::ValidationFailed: return "ValidationFailed";
    case Errc::DuplicateSpreadKey: return "DuplicateSpreadKey";
    case Errc::NameCollision: return "NameCollision";
    case Errc::StepFailed: return "StepFailed";
    case Errc::MalformedScript: return "MalformedScript";
    case Errc::NoCommonFormat: return "NoCommonFormat";
    case Errc::UnknownField: return "UnknownField";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::UnknownDataset: return "UnknownDataset";
    case Errc::MalformedProject: return "MalformedProject";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the engine.
///
/// `subject` names the offending entity (column, key, kind, ...) and
/// `location` carries a row index, line number or byte position depending
/// on the code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail, std::string subject = {},
        std::optional<std::size_t> location = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(std::move(detail)),
        subject_(std::move(subject)),
        location_(location) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& subject() const noexcept { return subject_; }
  std::optional<std::size_t> location() const noexcept { return location_; }

 private:
  Errc code_;
  std::string detail_;
  std::string subject_;
  std::optional<std::size_t> location_;
};

/// Raised by pipeline application; wraps the failure of one step.
class StepFailedError : public Error {
 public:
  StepFailedError(std::size_t index, const Error& cause)
      : Error(Errc::StepFailed,
              "step " + std::to_string(index) + " failed: " + cause.what(),
              cause.subject(), index),
        index_(index),
        cause_(cause) {}

  std::size_t index() const noexcept { return index_; }
  const Error& cause() const noexcept { return cause_; }

 private:
  std::size_t index_;
  Error cause_;
};

/// Codes that mean "this step does not fit this table".
constexpr bool is_validation_failure(Errc code) {
  switch (code) {
    case Errc::UnknownColumn:
    case Errc::TypeViolation:
    case Errc::TypeMismatch:
    case Errc::SyntaxError:
    case Errc::RowOutOfBounds:
    case Errc::ValidationFailed:
    case Errc::DuplicateSpreadKey:
    case Errc::NameCollision:
    case Errc::DuplicateColumn:
    case Errc::InvalidName:
    case Errc::StepFailed:
      return true;
    default:
      return false;
  }
}

}  // namespace tablehub
