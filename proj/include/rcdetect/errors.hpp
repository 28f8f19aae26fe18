#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcdetect {

// Base for everything thrown by this library. The CLI maps subtypes to exit
// codes: usage 1, io 2, schema 3, training 4, anything else 5.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Schema family: malformed bytes or text, wrong columns, bad file magic.
struct SchemaError : Error {
  using Error::Error;
};

struct ParseError : SchemaError {
  using SchemaError::SchemaError;
};

struct FormatError : SchemaError {
  using SchemaError::SchemaError;
};

struct TruncationError : SchemaError {
  TruncationError(const std::string& msg, std::size_t index)
      : SchemaError(msg), packet_index(index) {}
  std::size_t packet_index;
};

struct UnsupportedLinkTypeError : SchemaError {
  using SchemaError::SchemaError;
};

struct EmptyInputError : SchemaError {
  using SchemaError::SchemaError;
};

struct ConfigError : SchemaError {
  using SchemaError::SchemaError;
};

// Training family.
struct TrainingError : Error {
  using Error::Error;
};

struct ParamError : TrainingError {
  using TrainingError::TrainingError;
};

struct InsufficientBaselineError : TrainingError {
  InsufficientBaselineError(const std::string& msg, std::size_t required)
      : TrainingError(msg), required_count(required) {}
  std::size_t required_count;
};

struct EmptyTrainingError : TrainingError {
  using TrainingError::TrainingError;
};

// Training data that cannot orient a margin (e.g. one class only).
struct DegenerateTrainingError : TrainingError {
  using TrainingError::TrainingError;
};

// Internal family (exit 5).
struct ShapeError : Error {
  using Error::Error;
};

struct EmptyWindowError : Error {
  using Error::Error;
};

struct MissingTelemetryError : Error {
  using Error::Error;
};

}  // namespace rcdetect
