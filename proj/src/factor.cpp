#include "pfaffian/factor.hpp"

#include <algorithm>
#include <cmath>

#include "pfaffian/error.hpp"

namespace pfaffian {

namespace {

constexpr std::size_t kMaxDivisorsPerPoint = 4096;
constexpr std::size_t kMaxCandidates = 200000;

Poly free_derivative(const Poly& p, Var v) {
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    const auto e = m.degree_in(v);
    if (e > 0) out += Poly::term(m.with_power(v, e - 1), c * e);
  }
  return out;
}

Poly quotient(const Poly& a, const Poly& b) { return *divide_exact(a, b); }

std::vector<mpz_class> integer_divisors(mpz_class n) {
  n = abs(n);
  std::vector<mpz_class> out;
  if (n == 0) return out;
  if (n > mpz_class("1000000000000")) return {1, n};
  std::vector<mpz_class> large;
  for (mpz_class d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d * d != n) large.push_back(n / d);
    }
  }
  out.insert(out.end(), large.rbegin(), large.rend());
  return out;
}

// All divisors of `value` (up to sign, sign handled by the caller), or
// nullopt when there are too many to enumerate.
std::optional<std::vector<Poly>> polynomial_divisors(const Poly& value) {
  const Factorization f = factor(value);
  std::vector<Poly> divisors;
  for (const mpz_class& d : integer_divisors(f.unit.get_num())) divisors.emplace_back(Rational(d));
  for (const auto& [fac, mult] : f.factors) {
    std::vector<Poly> next;
    Poly power(1);
    for (unsigned k = 0; k <= mult; ++k) {
      for (const Poly& d : divisors) next.push_back(d * power);
      if (next.size() > kMaxDivisorsPerPoint) return std::nullopt;
      power = power * fac;
    }
    divisors = std::move(next);
  }
  return divisors;
}

Poly evaluate_at(const Poly& g, Var v, long t) { return g.substitute(v, Poly(t)); }

// Searches for a factor of g with degree exactly `degree` in v by
// interpolating divisors of g at v = 0, 1, -1.
std::optional<Poly> kronecker_search(const Poly& g, Var v, unsigned degree) {
  static constexpr long kPoints[] = {0, 1, -1};
  std::vector<std::vector<Poly>> choices;
  for (unsigned i = 0; i <= degree; ++i) {
    const long t = kPoints[i];
    const Poly value = evaluate_at(g, v, t);
    if (value.is_zero()) return Poly::variable(v) - Poly(t);
    auto divisors = polynomial_divisors(value);
    if (!divisors) return std::nullopt;
    std::vector<Poly> signed_divisors;
    for (const Poly& d : *divisors) {
      signed_divisors.push_back(d);
      // The overall sign of the factor is irrelevant: fix it at the first point.
      if (i > 0) signed_divisors.push_back(-d);
    }
    choices.push_back(std::move(signed_divisors));
  }
  std::size_t total = 1;
  for (const auto& c : choices) {
    total *= c.size();
    if (total > kMaxCandidates) return std::nullopt;
  }
  const Poly x = Poly::variable(v);
  std::vector<std::size_t> index(choices.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      index[i] = rem % choices[i].size();
      rem /= choices[i].size();
    }
    const Poly& d0 = choices[0][index[0]];
    const Poly& d1 = choices[1][index[1]];
    Poly candidate;
    if (degree == 1) {
      candidate = d0 + (d1 - d0) * x;
    } else {
      const Poly& dm = choices[2][index[2]];
      const Poly c1 = (d1 - dm) * Rational(1, 2);
      const Poly c2 = (d1 + dm) * Rational(1, 2) - d0;
      candidate = d0 + c1 * x + c2 * x.pow(2);
    }
    if (candidate.degree_in(v) != degree) continue;
    if (divide_exact(g, candidate)) return integer_primitive(candidate);
  }
  return std::nullopt;
}

void split(const Poly& g, std::vector<Poly>& out);

void split_pair(const Poly& g, const Poly& part, std::vector<Poly>& out) {
  split(integer_primitive(part), out);
  split(integer_primitive(quotient(g, part)), out);
}

// g is integer-primitive with no monomial content.
void split(const Poly& g, std::vector<Poly>& out) {
  if (g.is_constant()) return;
  const auto vars = g.variables();
  for (Var v : vars) {
    const Poly c = content_in(g, v);
    if (!c.is_constant()) return split_pair(g, c, out);
  }
  for (Var v : vars) {
    if (g.degree_in(v) < 2) continue;
    const Poly h = gcd(g, free_derivative(g, v));
    if (!h.is_constant()) return split_pair(g, h, out);
  }
  for (Var v : vars) {
    const auto deg = g.degree_in(v);
    // Primitive in v and linear in v: irreducible.
    if (deg == 1) {
      out.push_back(integer_primitive(g));
      return;
    }
  }
  for (unsigned d = 1; d <= 2; ++d) {
    for (Var v : vars) {
      if (g.degree_in(v) < 2 * d) continue;
      if (auto f = kronecker_search(g, v, d)) return split_pair(g, *f, out);
    }
  }
  out.push_back(integer_primitive(g));
}

}  // namespace

Poly unit_normal(const Poly& p) { return integer_primitive(p); }

Factorization factor(const Poly& p) {
  Factorization result;
  if (p.is_zero()) return result;
  Poly g = integer_primitive(p);
  result.unit = p.leading_coefficient() / g.leading_coefficient();
  if (g.is_constant()) return result;

  auto it = g.terms().begin();
  Monomial mono = it->first;
  for (++it; it != g.terms().end(); ++it) mono = mono.gcd(it->first);
  for (const auto& [v, e] : mono.powers()) result.factors.emplace_back(Poly::variable(v), e);
  if (!mono.is_one()) g = *divide_exact(g, Poly::term(mono, 1));

  std::vector<Poly> pieces;
  split(g, pieces);
  for (const Poly& f : pieces) {
    auto found = std::find_if(result.factors.begin(), result.factors.end(),
                              [&](const auto& entry) { return entry.first == f; });
    if (found != result.factors.end()) {
      ++found->second;
    } else {
      result.factors.emplace_back(f, 1);
    }
  }
  return result;
}

ExprFactorization factor(const Expr& e) {
  if (!e.is_polynomial()) {
    throw Error(ErrorKind::NotPolynomial, "symbolic-kernel", "factor requires a polynomial expression");
  }
  const Factorization f = factor(e.numerator());
  ExprFactorization out;
  out.unit = f.unit;
  for (const auto& [p, m] : f.factors) out.factors.emplace_back(Expr::polynomial(p), m);
  return out;
}

}  // namespace pfaffian
