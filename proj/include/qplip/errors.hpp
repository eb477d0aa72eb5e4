#pragma once

#include <stdexcept>
#include <string>

namespace qplip {

// All library failures derive from Error so callers can catch one type.
// Exit-code policy for tools: property failure = 1, usage/precision = 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class OutOfWindowError : public Error {
 public:
  explicit OutOfWindowError(const std::string& what) : Error(what) {}
};

class PrecisionLossError : public Error {
 public:
  explicit PrecisionLossError(const std::string& what) : Error(what) {}
};

class DivisionByZeroError : public Error {
 public:
  explicit DivisionByZeroError(const std::string& what) : Error(what) {}
};

class WindowExhaustedError : public Error {
 public:
  explicit WindowExhaustedError(const std::string& what) : Error(what) {}
};

class NoActivePieceError : public Error {
 public:
  explicit NoActivePieceError(const std::string& what) : Error(what) {}
};

class OverlappingGuardsError : public Error {
 public:
  explicit OverlappingGuardsError(const std::string& what) : Error(what) {}
};

class EmptyCellError : public Error {
 public:
  explicit EmptyCellError(const std::string& what) : Error(what) {}
};

class UnsupportedInputError : public Error {
 public:
  explicit UnsupportedInputError(const std::string& what) : Error(what) {}
};

class UnrecognizedShapeError : public Error {
 public:
  explicit UnrecognizedShapeError(const std::string& what) : Error(what) {}
};

class NoValidShiftError : public Error {
 public:
  explicit NoValidShiftError(const std::string& what) : Error(what) {}
};

class Condition1Error : public Error {
 public:
  explicit Condition1Error(const std::string& what) : Error(what) {}
};

class CenterNotTotalError : public Error {
 public:
  explicit CenterNotTotalError(const std::string& what) : Error(what) {}
};

class ApproximantNotFoundError : public Error {
 public:
  explicit ApproximantNotFoundError(const std::string& what) : Error(what) {}
};

class TooLargeError : public Error {
 public:
  explicit TooLargeError(const std::string& what) : Error(what) {}
};

class ArityError : public Error {
 public:
  explicit ArityError(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : Error(what + " (at offset " + std::to_string(pos) + ")"), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class UnknownConstructorError : public ParseError {
 public:
  UnknownConstructorError(const std::string& what, std::size_t pos)
      : ParseError(what, pos) {}
};

// Internal inconsistency (a bug), not a user input problem.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(what) {}
};

}  // namespace qplip
