#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace pfaffian {

using Rational = mpq_class;
using SymbolId = std::uint32_t;

// Indeterminates of the coefficient ring are declared symbols and the trig
// atoms cos(s), sin(s) of a symbol. The packed key orders them: plain
// symbols first (states, then parameters), then cos atoms, then sin atoms.
enum class AtomKind : std::uint32_t { Symbol = 0, Cos = 1, Sin = 2 };

using Var = std::uint32_t;

constexpr Var make_var(AtomKind kind, SymbolId symbol) {
  return (static_cast<std::uint32_t>(kind) << 24) | symbol;
}
constexpr AtomKind kind_of(Var v) { return static_cast<AtomKind>(v >> 24); }
constexpr SymbolId symbol_of(Var v) { return v & 0xffffffu; }

class Monomial {
 public:
  using Power = std::pair<Var, std::uint32_t>;

  Monomial() = default;
  static Monomial of(Var v, std::uint32_t exponent = 1);

  const std::vector<Power>& powers() const { return powers_; }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t degree_in(Var v) const;
  bool is_one() const { return powers_.empty(); }

  Monomial operator*(const Monomial& other) const;
  bool divides(const Monomial& other) const;
  // Requires divisor.divides(*this).
  Monomial operator/(const Monomial& divisor) const;
  Monomial without(Var v) const;
  Monomial with_power(Var v, std::uint32_t exponent) const;
  Monomial gcd(const Monomial& other) const;

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.powers_ == b.powers_; }
  friend bool operator!=(const Monomial& a, const Monomial& b) { return !(a == b); }

 private:
  std::vector<Power> powers_;  // sorted by Var, exponents > 0
  std::uint32_t degree_ = 0;
};

// Graded lexicographic order; the comparator sorts the larger monomial first
// so that the first map entry of a polynomial is its leading term.
struct GrlexDescending {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// Sparse multivariate polynomial over Q in the free ring of indeterminates.
// The Pythagorean relation is not applied here; see reduce_trig().
class Poly {
 public:
  using Terms = std::map<Monomial, Rational, GrlexDescending>;

  Poly() = default;
  Poly(const Rational& constant);
  Poly(long constant) : Poly(Rational(constant)) {}
  Poly(int constant) : Poly(Rational(constant)) {}
  static Poly variable(Var v);
  static Poly term(const Monomial& m, const Rational& c);

  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  // Valid when is_constant().
  Rational constant_value() const;
  const Monomial& leading_monomial() const { return terms_.begin()->first; }
  const Rational& leading_coefficient() const { return terms_.begin()->second; }
  std::uint32_t total_degree() const;

  Poly operator-() const;
  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(const Rational& c);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly pow(std::uint32_t exponent) const;
  Poly multiply_monomial(const Monomial& m, const Rational& c) const;

  bool contains(Var v) const;
  std::uint32_t degree_in(Var v) const;
  // Coefficients of p viewed as a polynomial in v (v removed from each).
  std::map<std::uint32_t, Poly> coefficients_in(Var v) const;
  Poly leading_coefficient_in(Var v) const;
  // Sorted, without duplicates.
  std::vector<Var> variables() const;
  std::vector<SymbolId> symbols() const;

  // Partial derivative with respect to a symbol, through its trig atoms.
  Poly derivative(SymbolId s) const;
  Poly substitute(Var v, const Poly& value) const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

// sin(s)^k -> sin(s)^(k-2) (1 - cos(s)^2) until every sin exponent is <= 1.
Poly reduce_trig(const Poly& p);
// sin(s) -> -sin(s).
Poly conjugate_sin(const Poly& p, SymbolId s);

// Multivariate division by a single divisor in grlex order.
std::pair<Poly, Poly> divide_with_remainder(const Poly& a, const Poly& b);
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);

// Positive rational c with p / c integral and primitive. content(0) == 0.
Rational rational_content(const Poly& p);
// p / rational_content(p) with a positive leading coefficient.
Poly integer_primitive(const Poly& p);
Poly monic(const Poly& p);

// Greatest common divisor over Q in the free ring, monic.
Poly gcd(const Poly& a, const Poly& b);
Poly content_in(const Poly& p, Var v);

}  // namespace pfaffian
