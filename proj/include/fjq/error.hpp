#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fjq {

enum class ErrorKind {
  Structural,      // malformed index structure
  UnsupportedOrder,
  Unsupported,
  Parse,
  Dimension,
  NotConstant,
  Singular,
  NeedsAnsatz,
  StillSingular,
  Validation,
  IncompleteGauge,
  InconsistentCount,
  IterationBound,
  UnknownName,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(ErrorKind::Parse, format(what, line, column)), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }
  int line_;
  int column_;
};

}  // namespace fjq
