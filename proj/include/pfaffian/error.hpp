#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfaffian {

enum class ErrorKind {
  DivisionByZeroExpr,
  UnknownSymbol,
  NotPolynomial,
  EvalSingular,
  SyntaxError,
  ArityMismatch,
  EmptyControlSet,
  SingularPivot,
  RankNotConstant,
  NoValidCompletion,
  RankUndecidable,
  NotClosed,
  StepSingular,
  DomainExit,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

// Every failure raised by the library. `module` names the pipeline component
// that raised it (symbolic-kernel, system-dsl, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const { return kind_; }
  const std::string& module() const { return module_; }
  // The message without the "Kind [module]: " prefix of what().
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string module_;
  std::string message_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message,
              std::vector<std::string> expected = {});

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::vector<std::string> expected_;
};

}  // namespace pfaffian
