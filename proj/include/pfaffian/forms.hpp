#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pfaffian/domain.hpp"
#include "pfaffian/expr.hpp"

namespace pfaffian {

// Strictly increasing coordinate indices (i1 < ... < ik) of dx_i1^...^dx_ik.
using FormIndex = std::vector<std::size_t>;

// Homogeneous k-form over the coordinate coframe dx_0..dx_{n-1}. Zero
// coefficients are never stored.
class DifferentialForm {
 public:
  DifferentialForm() = default;
  DifferentialForm(std::size_t n, std::size_t degree) : n_(n), degree_(degree) {}

  static DifferentialForm scalar(std::size_t n, const Expr& value);
  static DifferentialForm one_form(const std::vector<Expr>& coefficients);
  static DifferentialForm coordinate(std::size_t n, std::size_t i);

  std::size_t n() const { return n_; }
  std::size_t degree() const { return degree_; }
  const std::map<FormIndex, Expr>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  Expr coefficient(const FormIndex& index) const;
  // Adds c to the coefficient at an arbitrary (unsorted) index list,
  // applying the permutation sign; repeated indices contribute nothing.
  void add(FormIndex index, const Expr& c);
  // Coefficient vector of a 1-form (length n).
  std::vector<Expr> components() const;

  DifferentialForm operator-() const;
  friend DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b);
  friend DifferentialForm operator*(const Expr& c, const DifferentialForm& a);
  friend bool operator==(const DifferentialForm& a, const DifferentialForm& b) {
    return a.n_ == b.n_ && a.degree_ == b.degree_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const DifferentialForm& a, const DifferentialForm& b) { return !(a == b); }

  // "x*y*z dx - x*z dy + dz", "(a*cos(w) - sin(w)) dy^dz"; "0" for zero.
  std::string to_string(const SymbolTable& symbols) const;

 private:
  std::size_t n_ = 0;
  std::size_t degree_ = 0;
  std::map<FormIndex, Expr> terms_;
};

using VectorField = std::vector<Expr>;

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
// Exterior derivative; coordinates are the state symbols 0..n-1.
DifferentialForm d(const DifferentialForm& a);
// a(X) for a 1-form a; throws InvalidArgument for other degrees or sizes.
Expr contract(const DifferentialForm& a, const VectorField& X);

// Reduction modulo the algebraic ideal generated by 1-forms theta: theta = 0
// is solved for the pivot differentials, which are then substituted.
class Reducer {
 public:
  // Throws SingularPivot unless the pivot determinant is ProvenNonzero.
  Reducer(const std::vector<DifferentialForm>& theta, std::vector<std::size_t> pivots, const Domain& domain = {},
          std::uint64_t seed = 0);

  const std::vector<std::size_t>& pivots() const { return pivots_; }
  // Non-pivot coordinates in increasing order.
  const std::vector<std::size_t>& free() const { return free_; }
  const Expr& determinant() const { return determinant_; }

  // dx_i modulo theta, a 1-form in the free differentials only.
  const DifferentialForm& image(std::size_t i) const { return images_[i]; }
  DifferentialForm reduce(const DifferentialForm& a) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> pivots_;
  std::vector<std::size_t> free_;
  Expr determinant_;
  std::vector<DifferentialForm> images_;
};

DifferentialForm reduce_mod(const DifferentialForm& a, const std::vector<DifferentialForm>& theta,
                            const std::vector<std::size_t>& pivots, const Domain& domain = {},
                            std::uint64_t seed = 0);

}  // namespace pfaffian
