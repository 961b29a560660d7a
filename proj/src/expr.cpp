#include "pfaffian/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfaffian/error.hpp"

namespace pfaffian {

namespace {
constexpr const char* kModule = "symbolic-kernel";
}

// ------------------------------------------------------------- SymbolTable

SymbolTable::SymbolTable(std::vector<std::string> states, std::vector<Parameter> params)
    : states_(std::move(states)), params_(std::move(params)) {}

const std::string& SymbolTable::name(SymbolId s) const {
  if (s < states_.size()) return states_[s];
  if (s < size()) return params_[s - states_.size()].name;
  throw Error(ErrorKind::UnknownSymbol, kModule, "symbol id " + std::to_string(s));
}

ParamSign SymbolTable::sign(SymbolId s) const {
  return is_param(s) ? params_[s - states_.size()].sign : ParamSign::Any;
}

std::optional<SymbolId> SymbolTable::find(std::string_view name) const {
  for (SymbolId i = 0; i < size(); ++i) {
    if (this->name(i) == name) return i;
  }
  return std::nullopt;
}

std::string SymbolTable::atom_name(Var v) const {
  const std::string& n = name(symbol_of(v));
  switch (kind_of(v)) {
    case AtomKind::Symbol: return n;
    case AtomKind::Cos: return "cos(" + n + ")";
    case AtomKind::Sin: return "sin(" + n + ")";
  }
  return n;
}

// -------------------------------------------------------------------- Expr

Expr Expr::symbol(SymbolId s) { return polynomial(Poly::variable(make_var(AtomKind::Symbol, s))); }
Expr Expr::cos(SymbolId s) { return polynomial(Poly::variable(make_var(AtomKind::Cos, s))); }
Expr Expr::sin(SymbolId s) { return polynomial(Poly::variable(make_var(AtomKind::Sin, s))); }

Expr Expr::polynomial(Poly p) {
  Expr e;
  e.num_ = reduce_trig(p);
  return e;
}

Expr Expr::fraction(Poly num, Poly den) {
  if (den.is_zero()) throw Error(ErrorKind::DivisionByZeroExpr, kModule, "denominator is zero");
  Expr e;
  if (num.is_zero()) return e;
  num = reduce_trig(num);
  den = reduce_trig(den);
  if (den.is_zero()) throw Error(ErrorKind::DivisionByZeroExpr, kModule, "denominator normalizes to zero");
  // Rationalise: multiplying by the sin-conjugate removes sin(s) from den.
  for (Var v : den.variables()) {
    if (kind_of(v) != AtomKind::Sin || !den.contains(v)) continue;
    const Poly conj = conjugate_sin(den, symbol_of(v));
    num = reduce_trig(num * conj);
    den = reduce_trig(den * conj);
  }
  if (den.is_constant()) {
    e.num_ = num * Rational(1 / den.constant_value());
    return e;
  }
  const Poly g = gcd(num, den);
  if (!g.is_constant()) {
    num = *divide_exact(num, g);
    den = *divide_exact(den, g);
  }
  const Rational lc = den.leading_coefficient();
  e.num_ = num * Rational(1 / lc);
  e.den_ = den * Rational(1 / lc);
  if (e.den_.is_constant()) e.den_ = Poly(1);
  return e;
}

std::vector<SymbolId> Expr::symbols() const {
  auto a = num_.symbols();
  for (SymbolId s : den_.symbols()) a.push_back(s);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

bool Expr::depends_on(SymbolId s) const {
  for (SymbolId t : symbols()) {
    if (t == s) return true;
  }
  return false;
}

Expr Expr::operator-() const {
  Expr e = *this;
  e.num_ = -e.num_;
  return e;
}

Expr Expr::from_reduced(Poly num, Poly den) {
  Expr e;
  if (num.is_zero()) return e;
  if (den.is_constant()) {
    e.num_ = num * Rational(1 / den.constant_value());
    return e;
  }
  const Rational lc = den.leading_coefficient();
  e.num_ = num * Rational(1 / lc);
  e.den_ = den * Rational(1 / lc);
  return e;
}

namespace {

std::vector<Var> sin_atoms(const Poly& p) {
  std::vector<Var> out;
  for (Var v : p.variables()) {
    if (kind_of(v) == AtomKind::Sin) out.push_back(v);
  }
  return out;
}

bool share_sin_atom(const Poly& a, const Poly& b) {
  const auto sa = sin_atoms(a);
  if (sa.empty()) return false;
  for (Var v : sin_atoms(b)) {
    if (std::find(sa.begin(), sa.end(), v) != sa.end()) return true;
  }
  return false;
}

Poly quotient(const Poly& a, const Poly& b) { return b.is_constant() ? a : *divide_exact(a, b); }

}  // namespace

// Sums and products follow the usual cancellation scheme for reduced
// fractions (only gcds of denominator-sized pieces are needed). This is exact
// because denominators are sin-free: numerators are then vectors of
// polynomials over the sin-free ring and the UFD argument applies per
// component.
Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_polynomial() && b.is_polynomial()) return Expr::polynomial(a.num_ + b.num_);
  if (a.den_ == b.den_) {
    const Poly t = a.num_ + b.num_;
    if (t.is_zero()) return Expr{};
    const Poly g = gcd(t, a.den_);
    return Expr::from_reduced(quotient(t, g), quotient(a.den_, g));
  }
  const Poly g = gcd(a.den_, b.den_);
  const Poly da = quotient(a.den_, g);
  const Poly db = quotient(b.den_, g);
  const Poly t = a.num_ * db + b.num_ * da;
  if (t.is_zero()) return Expr{};
  if (g.is_constant()) return Expr::from_reduced(t, a.den_ * b.den_);
  const Poly g2 = gcd(t, g);
  return Expr::from_reduced(quotient(t, g2), da * quotient(b.den_, g2));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr{};
  if (a.is_polynomial() && b.is_polynomial()) return Expr::polynomial(a.num_ * b.num_);
  const Poly g1 = b.is_polynomial() ? Poly(1) : gcd(a.num_, b.den_);
  const Poly g2 = a.is_polynomial() ? Poly(1) : gcd(b.num_, a.den_);
  const Poly na = quotient(a.num_, g1);
  const Poly nb = quotient(b.num_, g2);
  const Poly den = quotient(a.den_, g2) * quotient(b.den_, g1);
  // sin^2 -> 1 - cos^2 can create new common factors; recheck in that case.
  if (share_sin_atom(na, nb)) return Expr::fraction(na * nb, den);
  return Expr::from_reduced(na * nb, den);
}

Expr Expr::inverse() const {
  if (is_zero()) throw Error(ErrorKind::DivisionByZeroExpr, kModule, "division by zero expression");
  if (sin_atoms(num_).empty()) return from_reduced(den_, num_);
  return fraction(den_, num_);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw Error(ErrorKind::DivisionByZeroExpr, kModule, "division by zero expression");
  if (b.is_constant()) {
    Expr e = a;
    e.num_ *= Rational(1 / b.constant_value());
    return e;
  }
  return a * b.inverse();
}

Expr Expr::pow(int exponent) const {
  if (exponent == 0) return Expr(1);
  if (exponent < 0) return pow(-exponent).inverse();
  if (is_polynomial()) return polynomial(num_.pow(static_cast<std::uint32_t>(exponent)));
  Expr result(1);
  Expr base = *this;
  for (int e = exponent; e > 0; e >>= 1) {
    if (e & 1) result = result * base;
    if (e > 1) base = base * base;
  }
  return result;
}

std::string to_string(const Poly& p, const SymbolTable& symbols) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool need_star = false;
    if (m.is_one() || mag != 1) {
      out << mag.get_str();
      need_star = true;
    }
    for (const auto& [v, e] : m.powers()) {
      if (need_star) out << "*";
      out << symbols.atom_name(v);
      if (e > 1) out << "^" << e;
      need_star = true;
    }
  }
  return out.str();
}

std::string Expr::to_string(const SymbolTable& symbols) const {
  std::string num = pfaffian::to_string(num_, symbols);
  if (is_polynomial()) return num;
  if (num_.size() > 1) num = "(" + num + ")";
  std::string den = pfaffian::to_string(den_, symbols);
  const bool single_atom =
      den_.size() == 1 && den_.leading_coefficient() == 1 && den_.leading_monomial().powers().size() == 1 &&
      den_.leading_monomial().powers().front().second == 1;
  if (!single_atom) den = "(" + den + ")";
  return num + "/" + den;
}

Expr normalize(const Expr& e) {
  return e.is_polynomial() ? Expr::polynomial(e.numerator()) : Expr::fraction(e.numerator(), e.denominator());
}

Expr differentiate(const Expr& e, SymbolId v) {
  if (e.is_polynomial()) return Expr::polynomial(e.numerator().derivative(v));
  const Poly& n = e.numerator();
  const Poly& d = e.denominator();
  return Expr::fraction(n.derivative(v) * d - n * d.derivative(v), d * d);
}

Expr differentiate(const Expr& e, SymbolId v, const SymbolTable& symbols) {
  if (!symbols.is_state(v)) {
    throw Error(ErrorKind::UnknownSymbol, kModule, "differentiation variable is not a declared state");
  }
  return differentiate(e, v);
}

std::optional<Expr> divide_exact(const Expr& num, const Expr& den) {
  if (den.is_zero()) throw Error(ErrorKind::DivisionByZeroExpr, kModule, "divide_exact by zero");
  if (num.is_zero()) return Expr{};
  if (num.is_polynomial() && den.is_polynomial()) {
    auto q = pfaffian::divide_exact(num.numerator(), den.numerator());
    if (!q) return std::nullopt;
    return Expr::polynomial(*q);
  }
  Expr q = num / den;
  if (!pfaffian::divide_exact(num.denominator(), q.denominator())) return std::nullopt;
  return q;
}

double evaluate(const Poly& p, const Assignment& values) {
  double total = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double t = c.get_d();
    for (const auto& [v, e] : m.powers()) {
      auto it = values.find(symbol_of(v));
      if (it == values.end()) {
        throw Error(ErrorKind::UnknownSymbol, kModule,
                    "no value for symbol id " + std::to_string(symbol_of(v)));
      }
      double base = it->second;
      if (kind_of(v) == AtomKind::Cos) base = std::cos(base);
      if (kind_of(v) == AtomKind::Sin) base = std::sin(base);
      t *= e == 1 ? base : std::pow(base, static_cast<double>(e));
    }
    total += t;
  }
  return total;
}

double evaluate(const Expr& e, const Assignment& p) {
  const double num = evaluate(e.numerator(), p);
  if (e.is_polynomial()) return num * (1.0 / e.denominator().constant_value().get_d());
  const double den = evaluate(e.denominator(), p);
  if (std::abs(den) < 1e-12) throw Error(ErrorKind::EvalSingular, kModule, "denominator vanishes at point");
  return num / den;
}

Expr substitute(const Expr& e, SymbolId s, const Expr& value) {
  const Var plain = make_var(AtomKind::Symbol, s);
  const Var cosv = make_var(AtomKind::Cos, s);
  const Var sinv = make_var(AtomKind::Sin, s);
  const bool trig = e.numerator().contains(cosv) || e.numerator().contains(sinv) ||
                    e.denominator().contains(cosv) || e.denominator().contains(sinv);
  if (trig && !(value.is_constant() && value.constant_value() == 0)) {
    throw Error(ErrorKind::NotPolynomial, kModule, "cannot substitute into trig atom");
  }
  auto sub = [&](const Poly& p) {
    Expr acc;
    for (const auto& [m, c] : p.terms()) {
      Expr term = Expr::polynomial(Poly::term(m.without(plain).without(cosv).without(sinv), c));
      const auto e_plain = m.degree_in(plain);
      if (e_plain) term = term * value.pow(static_cast<int>(e_plain));
      if (m.degree_in(sinv)) continue;  // sin(0) = 0
      acc += term;                       // cos(0) = 1
    }
    return acc;
  };
  return sub(e.numerator()) / sub(e.denominator());
}

}  // namespace pfaffian
