#pragma once

#include <utility>
#include <vector>

#include "pfaffian/expr.hpp"

namespace pfaffian {

struct Factorization {
  // input == unit * prod(factor^multiplicity)
  Rational unit = 0;
  std::vector<std::pair<Poly, unsigned>> factors;
};

// Partial factorization over Q: rational content, monomial factors, content
// with respect to each variable, square-free splitting, and a Kronecker
// search for factors of degree <= 2 in a single variable. Factors are
// integer-primitive with a positive leading coefficient. Trig atoms are
// opaque indeterminates. Factors beyond that scope are returned unsplit.
Factorization factor(const Poly& p);

struct ExprFactorization {
  Rational unit = 0;
  std::vector<std::pair<Expr, unsigned>> factors;
};

// NotPolynomial unless e has a constant denominator.
ExprFactorization factor(const Expr& e);

// Integer-primitive, positive-leading-coefficient representative of p up to a
// rational unit; used to compare factors.
Poly unit_normal(const Poly& p);

}  // namespace pfaffian
