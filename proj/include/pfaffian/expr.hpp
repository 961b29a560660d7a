#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pfaffian/poly.hpp"

namespace pfaffian {

enum class ParamSign { Any, Positive, Negative, Nonzero };

// Symbols of one system: states first, then parameters. Symbol ids are the
// positions in that combined list and never change after construction.
class SymbolTable {
 public:
  struct Parameter {
    std::string name;
    ParamSign sign = ParamSign::Any;
  };

  SymbolTable() = default;
  SymbolTable(std::vector<std::string> states, std::vector<Parameter> params);

  std::size_t state_count() const { return states_.size(); }
  std::size_t param_count() const { return params_.size(); }
  std::size_t size() const { return states_.size() + params_.size(); }

  bool is_state(SymbolId s) const { return s < states_.size(); }
  bool is_param(SymbolId s) const { return s >= states_.size() && s < size(); }
  const std::string& name(SymbolId s) const;
  ParamSign sign(SymbolId s) const;
  std::optional<SymbolId> find(std::string_view name) const;
  // "x", "cos(w)", "sin(w)".
  std::string atom_name(Var v) const;

  const std::vector<std::string>& states() const { return states_; }
  const std::vector<Parameter>& params() const { return params_; }

 private:
  std::vector<std::string> states_;
  std::vector<Parameter> params_;
};

// Values for symbols, keyed by symbol id.
using Assignment = std::map<SymbolId, double>;

// Scalar expression in canonical form: a reduced fraction num/den of
// polynomials in the symbols and their trig atoms, with
//  - every sin exponent <= 1 (sin^2 rewritten as 1 - cos^2),
//  - a denominator free of sin atoms (rationalised by conjugation),
//  - gcd(num, den) = 1 and a monic denominator.
// Construction always canonicalises, so equal expressions compare equal.
class Expr {
 public:
  Expr() : den_(1) {}
  Expr(const Rational& c) : num_(c), den_(1) {}
  Expr(long c) : Expr(Rational(c)) {}
  Expr(int c) : Expr(Rational(c)) {}

  static Expr symbol(SymbolId s);
  static Expr cos(SymbolId s);
  static Expr sin(SymbolId s);
  static Expr polynomial(Poly p);
  // Throws DivisionByZeroExpr when den is zero.
  static Expr fraction(Poly num, Poly den);

  const Poly& numerator() const { return num_; }
  const Poly& denominator() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value(); }
  // Symbols referenced by the numerator or denominator.
  std::vector<SymbolId> symbols() const;
  bool depends_on(SymbolId s) const;

  Expr operator-() const;
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  Expr pow(int exponent) const;
  // 1 / *this; throws DivisionByZeroExpr for zero.
  Expr inverse() const;

  std::string to_string(const SymbolTable& symbols) const;

 private:
  // num/den already coprime with den sin-free; only normalises the unit.
  static Expr from_reduced(Poly num, Poly den);

  Poly num_;
  Poly den_;
};

std::string to_string(const Poly& p, const SymbolTable& symbols);

// Expressions are canonical on construction; this returns e re-canonicalised
// from its parts and exists for callers holding raw numerator/denominator.
Expr normalize(const Expr& e);

Expr differentiate(const Expr& e, SymbolId v);
// Checked variant: v must be a state of `symbols` (UnknownSymbol otherwise).
Expr differentiate(const Expr& e, SymbolId v, const SymbolTable& symbols);

// q with num = q * den, or nullopt when the division would introduce a
// denominator factor not already present in num. For polynomial operands this
// is exact multivariate division (nullopt iff the remainder is nonzero).
std::optional<Expr> divide_exact(const Expr& num, const Expr& den);

// Throws UnknownSymbol if p misses a symbol of e, EvalSingular when
// |denominator| < 1e-12.
double evaluate(const Expr& e, const Assignment& p);
double evaluate(const Poly& p, const Assignment& values);

// Substitutes symbol s by an expression.
Expr substitute(const Expr& e, SymbolId s, const Expr& value);

}  // namespace pfaffian
