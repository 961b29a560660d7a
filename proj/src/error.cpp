#include "pfaffian/error.hpp"

namespace pfaffian {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DivisionByZeroExpr: return "DivisionByZeroExpr";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::NotPolynomial: return "NotPolynomial";
    case ErrorKind::EvalSingular: return "EvalSingular";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::EmptyControlSet: return "EmptyControlSet";
    case ErrorKind::SingularPivot: return "SingularPivot";
    case ErrorKind::RankNotConstant: return "RankNotConstant";
    case ErrorKind::NoValidCompletion: return "NoValidCompletion";
    case ErrorKind::RankUndecidable: return "RankUndecidable";
    case ErrorKind::NotClosed: return "NotClosed";
    case ErrorKind::StepSingular: return "StepSingular";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " [" + module + "]: " + message),
      kind_(kind),
      module_(std::move(module)),
      message_(message) {}

namespace {
std::string syntax_message(std::size_t line, std::size_t column, const std::string& message,
                           const std::vector<std::string>& expected) {
  std::string out = "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
  if (!expected.empty()) {
    out += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) out += " or ";
      out += expected[i];
    }
    out += ")";
  }
  return out;
}
}  // namespace

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& message,
                         std::vector<std::string> expected)
    : Error(ErrorKind::SyntaxError, "system-dsl", syntax_message(line, column, message, expected)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

}  // namespace pfaffian
