#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "pfaffian/error.hpp"
#include "pfaffian/system.hpp"

namespace pfaffian {

namespace {

constexpr const char* kModule = "system-dsl";
constexpr int kMaxDepth = 200;
constexpr int kMaxExponent = 64;

enum class Tok { Number, Ident, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t column = 0;  // 1-based, absolute
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t column_offset)
      : text_(text), line_(line), offset_(column_offset) {
    advance();
  }

  const Token& peek() const { return current_; }
  Token next() {
    Token t = current_;
    advance();
    return t;
  }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const Token& at, const std::string& message, std::vector<std::string> expected = {}) const {
    throw SyntaxError(line_, at.column, message, std::move(expected));
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    current_ = Token{};
    current_.column = offset_ + pos_ + 1;
    if (pos_ >= text_.size()) {
      current_.kind = Tok::End;
      return;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < text_.size() &&
                                                         std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
      std::size_t end = pos_;
      bool dot = false;
      while (end < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[end])) || (text_[end] == '.' && !dot))) {
        if (text_[end] == '.') dot = true;
        ++end;
      }
      current_.kind = Tok::Number;
      current_.text = std::string(text_.substr(pos_, end - pos_));
      pos_ = end;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_')) ++end;
      current_.kind = Tok::Ident;
      current_.text = std::string(text_.substr(pos_, end - pos_));
      pos_ = end;
      return;
    }
    if (c == '!' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '=') {
      current_.kind = Tok::Op;
      current_.text = "!=";
      pos_ += 2;
      return;
    }
    current_.kind = Tok::Op;
    current_.text = std::string(1, c);
    ++pos_;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t offset_;
  std::size_t pos_ = 0;
  Token current_;
};

Rational parse_decimal(const std::string& text) {
  const auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(mpz_class(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  if (digits.empty()) digits = "0";
  mpz_class scale = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
  Rational r(mpz_class(digits), scale);
  r.canonicalize();
  return r;
}

// Pratt parser over one expression.
class ExprParser {
 public:
  ExprParser(Lexer& lex, const SymbolTable& symbols) : lex_(lex), symbols_(symbols) {}

  Expr expression(int min_bp = 0) {
    if (++depth_ > kMaxDepth) lex_.fail(lex_.peek(), "expression nested too deeply");
    Expr lhs = prefix();
    while (true) {
      const Token& op = lex_.peek();
      if (op.kind != Tok::Op) break;
      int bp = 0;
      if (op.text == "+" || op.text == "-") {
        bp = 10;
      } else if (op.text == "*" || op.text == "/") {
        bp = 20;
      } else if (op.text == "^") {
        bp = 30;
      } else {
        break;
      }
      if (bp <= min_bp) break;
      const Token tok = lex_.next();
      if (tok.text == "^") {
        lhs = lhs.pow(exponent());
        if (lex_.peek().kind == Tok::Op && lex_.peek().text == "^") {
          lex_.fail(lex_.peek(), "chained exponents are ambiguous; use parentheses");
        }
        continue;
      }
      Expr rhs = expression(bp);
      if (tok.text == "+") {
        lhs = lhs + rhs;
      } else if (tok.text == "-") {
        lhs = lhs - rhs;
      } else if (tok.text == "*") {
        lhs = lhs * rhs;
      } else {
        if (rhs.is_zero()) {
          throw Error(ErrorKind::DivisionByZeroExpr, kModule,
                      position(tok) + ": division by an expression that normalizes to zero");
        }
        lhs = lhs / rhs;
      }
    }
    --depth_;
    return lhs;
  }

 private:
  std::string position(const Token& t) const {
    return "line " + std::to_string(lex_.line()) + ", column " + std::to_string(t.column);
  }

  int exponent() {
    bool negative = false;
    bool parens = false;
    if (lex_.peek().kind == Tok::Op && lex_.peek().text == "(") {
      lex_.next();
      parens = true;
    }
    if (lex_.peek().kind == Tok::Op && lex_.peek().text == "-") {
      lex_.next();
      negative = true;
    }
    const Token t = lex_.next();
    if (t.kind != Tok::Number || t.text.find('.') != std::string::npos) {
      lex_.fail(t, "exponent must be an integer literal", {"integer"});
    }
    if (t.text.size() > 3 || std::stoi(t.text) > kMaxExponent) lex_.fail(t, "exponent too large");
    if (parens) expect(")");
    const int e = std::stoi(t.text);
    return negative ? -e : e;
  }

  void expect(const char* op) {
    const Token t = lex_.next();
    if (t.kind != Tok::Op || t.text != op) lex_.fail(t, "unexpected " + describe(t), {std::string("'") + op + "'"});
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return "end of input";
      case Tok::Number: return "number '" + t.text + "'";
      case Tok::Ident: return "identifier '" + t.text + "'";
      case Tok::Op: return "'" + t.text + "'";
    }
    return "token";
  }

  SymbolId lookup(const Token& t) {
    auto id = symbols_.find(t.text);
    if (!id) throw Error(ErrorKind::UnknownSymbol, kModule, position(t) + ": unknown symbol '" + t.text + "'");
    return *id;
  }

  Expr prefix() {
    const Token t = lex_.next();
    switch (t.kind) {
      case Tok::Number: return Expr(parse_decimal(t.text));
      case Tok::Ident: {
        if ((t.text == "sin" || t.text == "cos") && lex_.peek().kind == Tok::Op && lex_.peek().text == "(") {
          lex_.next();
          const Token arg = lex_.next();
          if (arg.kind != Tok::Ident) {
            lex_.fail(arg, t.text + " takes a single declared symbol as argument", {"symbol"});
          }
          const SymbolId s = lookup(arg);
          expect(")");
          return t.text == "sin" ? Expr::sin(s) : Expr::cos(s);
        }
        return Expr::symbol(lookup(t));
      }
      case Tok::Op:
        if (t.text == "-") return -expression(25);
        if (t.text == "+") return expression(25);
        if (t.text == "(") {
          Expr inner = expression();
          expect(")");
          return inner;
        }
        break;
      case Tok::End: break;
    }
    lex_.fail(t, "unexpected " + describe(t), {"number", "symbol", "'('", "'-'"});
  }

  Lexer& lex_;
  const SymbolTable& symbols_;
  int depth_ = 0;
};

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

struct Line {
  std::size_t number = 0;
  std::string key;       // first word of the key
  std::string label;     // optional name after the key word (control g1)
  std::string value;     // raw value text
  std::size_t value_column = 0;  // 0-based column where `value` starts
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    std::string_view raw = text.substr(start, end - start);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (!trim(raw).empty()) {
      const auto colon = raw.find(':');
      if (colon == std::string_view::npos) {
        const auto first = raw.find_first_not_of(" \t");
        throw SyntaxError(number, first + 1, "expected 'key: value'", {"':'"});
      }
      std::istringstream words{std::string(raw.substr(0, colon))};
      Line line;
      line.number = number;
      std::string extra;
      words >> line.key >> line.label >> extra;
      if (!extra.empty()) throw SyntaxError(number, 1, "malformed key '" + trim(raw.substr(0, colon)) + "'");
      if (line.key == "assume" && line.label == "nonzero") {
        line.key = "assume_nonzero";
        line.label.clear();
      }
      line.value = std::string(raw.substr(colon + 1));
      line.value_column = colon + 1;
      out.push_back(std::move(line));
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return out;
}

FieldComponents parse_vector(const Line& line, const SymbolTable& symbols) {
  Lexer lex(line.value, line.number, line.value_column);
  ExprParser parser(lex, symbols);
  Token open = lex.next();
  if (open.kind != Tok::Op || open.text != "[") lex.fail(open, "expected a vector", {"'['"});
  FieldComponents out;
  if (lex.peek().kind == Tok::Op && lex.peek().text == "]") {
    lex.next();
  } else {
    while (true) {
      out.push_back(parser.expression());
      const Token sep = lex.next();
      if (sep.kind == Tok::Op && sep.text == "]") break;
      if (sep.kind != Tok::Op || sep.text != ",") lex.fail(sep, "unexpected token in vector", {"','", "']'"});
    }
  }
  const Token end = lex.next();
  if (end.kind != Tok::End) lex.fail(end, "trailing input after vector", {"end of line"});
  if (out.size() != symbols.state_count()) {
    throw Error(ErrorKind::ArityMismatch, kModule,
                "line " + std::to_string(line.number) + ": vector has " + std::to_string(out.size()) +
                    " components, expected " + std::to_string(symbols.state_count()));
  }
  return out;
}

Expr parse_scalar(const Line& line, const SymbolTable& symbols) { return parse_expr(line.value, symbols, line.number, line.value_column); }

}  // namespace

Expr parse_expr(std::string_view text, const SymbolTable& symbols, std::size_t line, std::size_t column_offset) {
  Lexer lex(text, line, column_offset);
  ExprParser parser(lex, symbols);
  Expr e = parser.expression();
  const Token end = lex.next();
  if (end.kind != Tok::End) lex.fail(end, "unexpected trailing input", {"operator", "end of input"});
  return e;
}

bool ControlAffineSystem::has_drift() const {
  return std::any_of(drift.begin(), drift.end(), [](const Expr& e) { return !e.is_zero(); });
}

std::vector<FieldComponents> ControlAffineSystem::fields() const {
  std::vector<FieldComponents> out;
  out.push_back(drift);
  for (const auto& g : controls) out.push_back(g);
  return out;
}

double ControlSchedule::horizon() const {
  double total = 0.0;
  for (const auto& p : pieces) total += p.duration;
  return total;
}

ControlAffineSystem parse_system(std::string_view text) {
  const std::vector<Line> lines = split_lines(text);
  std::vector<std::string> states;
  std::vector<SymbolTable::Parameter> params;
  std::vector<std::string> seen;
  auto declare = [&](const std::string& name, std::size_t line) {
    if (!valid_identifier(name)) throw SyntaxError(line, 1, "invalid symbol name '" + name + "'");
    if (name == "sin" || name == "cos") throw SyntaxError(line, 1, "'" + name + "' is reserved");
    if (std::find(seen.begin(), seen.end(), name) != seen.end()) {
      throw SyntaxError(line, 1, "symbol '" + name + "' declared twice");
    }
    seen.push_back(name);
  };

  bool have_states = false;
  for (const Line& line : lines) {
    if (line.key == "states") {
      if (have_states) throw SyntaxError(line.number, 1, "duplicate states declaration");
      have_states = true;
      std::istringstream words(line.value);
      std::string w;
      while (words >> w) {
        declare(w, line.number);
        states.push_back(w);
      }
    } else if (line.key == "params") {
      std::string entry;
      std::istringstream parts(line.value);
      while (std::getline(parts, entry, ',')) {
        const std::string e = trim(entry);
        if (e.empty()) continue;
        Lexer lex(e, line.number, line.value_column);
        const Token name = lex.next();
        if (name.kind != Tok::Ident) lex.fail(name, "expected parameter name", {"identifier"});
        SymbolTable::Parameter p{name.text, ParamSign::Any};
        const Token op = lex.next();
        if (op.kind != Tok::End) {
          const Token zero = lex.next();
          if (zero.kind != Tok::Number || parse_decimal(zero.text) != 0) {
            lex.fail(zero, "parameter constraints compare against 0", {"0"});
          }
          if (op.text == ">") {
            p.sign = ParamSign::Positive;
          } else if (op.text == "<") {
            p.sign = ParamSign::Negative;
          } else if (op.text == "!=") {
            p.sign = ParamSign::Nonzero;
          } else {
            lex.fail(op, "unknown parameter constraint", {"'>'", "'<'", "'!='"});
          }
          const Token end = lex.next();
          if (end.kind != Tok::End) lex.fail(end, "trailing input in parameter declaration", {"','"});
        }
        declare(p.name, line.number);
        params.push_back(p);
      }
    }
  }
  if (!have_states || states.empty()) throw SyntaxError(1, 1, "missing 'states:' declaration", {"states"});

  ControlAffineSystem sys;
  sys.symbols = SymbolTable(states, params);
  sys.drift.assign(states.size(), Expr{});
  bool have_drift = false;
  for (const Line& line : lines) {
    if (line.key == "states" || line.key == "params") continue;
    if (line.key == "drift") {
      if (have_drift) throw SyntaxError(line.number, 1, "duplicate drift declaration");
      have_drift = true;
      sys.drift = parse_vector(line, sys.symbols);
    } else if (line.key == "control") {
      const std::string name = line.label.empty() ? "g" + std::to_string(sys.controls.size() + 1) : line.label;
      sys.control_names.push_back(name);
      sys.controls.push_back(parse_vector(line, sys.symbols));
    } else if (line.key == "candidate") {
      const std::string name =
          line.label.empty() ? "rho" + std::to_string(sys.candidates.size() + 1) : line.label;
      sys.candidate_names.push_back(name);
      sys.candidates.push_back(parse_scalar(line, sys.symbols));
    } else if (line.key == "assume_nonzero") {
      sys.assume_nonzero.push_back(parse_scalar(line, sys.symbols));
    } else {
      throw SyntaxError(line.number, 1, "unknown key '" + line.key + "'",
                        {"states", "params", "drift", "control", "candidate", "assume_nonzero"});
    }
  }
  if (sys.controls.empty()) throw Error(ErrorKind::EmptyControlSet, kModule, "no 'control' lines");
  if (sys.m() > sys.n()) {
    throw Error(ErrorKind::ArityMismatch, kModule,
                std::to_string(sys.m()) + " controls exceed the state dimension " + std::to_string(sys.n()));
  }
  return sys;
}

std::string print_system(const ControlAffineSystem& sys) {
  std::ostringstream out;
  const auto& symbols = sys.symbols;
  auto vec = [&](const FieldComponents& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      s += v[i].to_string(symbols);
    }
    return s + "]";
  };
  out << "states:";
  for (const auto& s : symbols.states()) out << " " << s;
  out << "\n";
  if (symbols.param_count() > 0) {
    out << "params: ";
    for (std::size_t i = 0; i < symbols.params().size(); ++i) {
      const auto& p = symbols.params()[i];
      if (i) out << ", ";
      out << p.name;
      switch (p.sign) {
        case ParamSign::Positive: out << " > 0"; break;
        case ParamSign::Negative: out << " < 0"; break;
        case ParamSign::Nonzero: out << " != 0"; break;
        case ParamSign::Any: break;
      }
    }
    out << "\n";
  }
  if (sys.has_drift()) out << "drift: " << vec(sys.drift) << "\n";
  for (std::size_t j = 0; j < sys.m(); ++j) out << "control " << sys.control_names[j] << ": " << vec(sys.controls[j]) << "\n";
  for (std::size_t k = 0; k < sys.candidates.size(); ++k) {
    out << "candidate " << sys.candidate_names[k] << ": " << sys.candidates[k].to_string(symbols) << "\n";
  }
  for (const Expr& c : sys.assume_nonzero) out << "assume_nonzero: " << c.to_string(symbols) << "\n";
  return out.str();
}

}  // namespace pfaffian
