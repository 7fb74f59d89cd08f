#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dtc {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidActionSet : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class EmptyInput : public Error {
public:
  using Error::Error;
};

// --- ingest -----------------------------------------------------------------

class HeaderError : public Error {
public:
  using Error::Error;
};

class EmptyController : public Error {
public:
  using Error::Error;
};

class SpecError : public Error {
public:
  using Error::Error;
};

// A data row with the wrong arity (or otherwise unusable as a whole).
class MalformedRow : public Error {
public:
  MalformedRow(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// A single field that does not parse as a finite decimal number.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

// --- learner ----------------------------------------------------------------

class InconsistentData : public Error {
public:
  using Error::Error;
};

class DepthExceeded : public Error {
public:
  using Error::Error;
};

class Timeout : public Error {
public:
  using Error::Error;
};

class TrainingDegenerate : public Error {
public:
  using Error::Error;
};

}  // namespace dtc
