#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emoface {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collinear, duplicate, or zero-variance geometry.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a precondition (shape mismatch, invalid one-hot, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. `offset` is the byte (or line) position where
/// parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Archive written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration (unknown backend, absent weights).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A loss became non-finite during training.
class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside one stage of the animation pipeline.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace emoface
