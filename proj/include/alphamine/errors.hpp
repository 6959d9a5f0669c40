#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alphamine {

// Error families. The numeric values are the command-line exit codes.
enum class ErrorKind { io = 1, input = 2, generator = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Unreadable/unwritable files, sink failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Anything the user supplied that does not meet a precondition.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

// Malformed line in a CSV or JSON-lines file.
class FormatError : public InputError {
 public:
  FormatError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GeneratorError : public Error {
 public:
  explicit GeneratorError(const std::string& what) : Error(ErrorKind::generator, what) {}
};

}  // namespace alphamine
