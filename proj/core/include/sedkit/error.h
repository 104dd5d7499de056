#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sedkit {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown class name or vocabulary mismatch.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// Input data violates a documented invariant (negative times, events past
// the clip end, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (shape mismatch, logits where
// probabilities are required, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class SizeError : public ContractError {
 public:
  using ContractError::ContractError;
};

// NaN / inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the location so tools can report
// "file:line:column: message".
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column,
             const std::string& message)
      : ValidationError(file + ":" + std::to_string(line) + ":" +
                        std::to_string(column) + ": " + message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace sedkit
