#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lexner {

// Malformed or inconsistent input data (files, annotations, tag sequences).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A column or annotation file could not be parsed; carries the 1-based line.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A tag sequence violates its scheme; carries the 0-based token position.
class ValidationError : public DataError {
 public:
  ValidationError(const std::string& what, std::size_t position)
      : DataError("position " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Binary file ended early or carried a bad header; carries the byte offset.
class FormatError : public DataError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : DataError("byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// Non-finite values or a diverging optimizer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lexner
