#pragma once

#include <stdexcept>
#include <string>

namespace auvhunt {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, configuration or shapes. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file or stored artifact failed a structural or checksum test. Exit code 3.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class FormatError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

class VersionError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

class ChecksumError : public IntegrityError {
 public:
  ChecksumError(std::string block, const std::string& what)
      : IntegrityError(what), block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

 private:
  std::string block_;
};

class TruncatedError : public IntegrityError {
 public:
  using IntegrityError::IntegrityError;
};

}  // namespace auvhunt
