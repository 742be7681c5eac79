#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gtd {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Invalid configuration or scenario shape.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API called in the wrong state (e.g. step after done).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input series do not line up hour by hour; carries the offending timestamp.
class AlignmentError : public std::runtime_error {
 public:
  AlignmentError(const std::string& timestamp, const std::string& what)
      : std::runtime_error(what + " at " + timestamp), timestamp_(timestamp) {}

  const std::string& timestamp() const { return timestamp_; }

 private:
  std::string timestamp_;
};

// Training diverged (non-finite loss or gradient).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gtd
