#pragma once

#include <stdexcept>
#include <string>

namespace vvb {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or violated precondition (bad angles, non-unit vectors, ...).
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Tensor/image dimensions do not match what an operation expects.
class ShapeError : public Error {
  public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

/// Degenerate input where a full-rank fit is required (e.g. coplanar calibration set).
class RankError : public Error {
  public:
    explicit RankError(const std::string& msg) : Error(msg) {}
};

/// Bad run configuration (unknown keys, invalid values).
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// File-system level failure (open, read, write, rename).
class IoError : public Error {
  public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// File does not start with the expected magic bytes.
class MagicMismatchError : public IoError {
  public:
    explicit MagicMismatchError(const std::string& msg) : IoError(msg) {}
};

/// File declares a format version this build cannot read.
class VersionMismatchError : public IoError {
  public:
    explicit VersionMismatchError(const std::string& msg) : IoError(msg) {}
};

/// File ends before the declared payload.
class TruncatedFileError : public IoError {
  public:
    explicit TruncatedFileError(const std::string& msg) : IoError(msg) {}
};

} // namespace vvb
