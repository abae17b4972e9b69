#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sicn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant. `field()` names the offending
/// field or element so callers can report it without parsing the message.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Input text or bytes could not be decoded. `position()` is a 1-based line
/// number for text inputs and a byte offset for binary inputs.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(message), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace sicn
