#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfaffian/domain.hpp"
#include "pfaffian/error.hpp"
#include "pfaffian/expr.hpp"

namespace pfaffian {

using ExprMatrix = std::vector<std::vector<Expr>>;

enum class PivotClass { Constant, AssumedNonzero, ProvenNonzero };

struct RowReduction {
  ExprMatrix reduced;  // reduced row echelon form up to column order
  std::vector<std::size_t> pivot_columns;
  std::vector<Expr> pivots;  // pivot entries before scaling (for the record)
  std::size_t rank() const { return pivot_columns.size(); }
};

// Where an elimination gets its pivot verdicts and what it throws when a
// nonzero entry cannot be certified numerically.
struct PivotPolicy {
  Domain domain;
  std::uint64_t seed = 0;
  ErrorKind undecided = ErrorKind::RankNotConstant;
  const char* module = "flag-analyzer";
  // Only columns below this index may hold pivots.
  std::size_t pivot_column_limit = static_cast<std::size_t>(-1);
};

PivotClass classify_pivot(const Expr& e, const Domain& domain);

// Gauss-Jordan elimination with full pivoting. Among nonzero entries the
// pivot is the first (column, row) in the best class: constants, then
// entries nonzero by assumption, then entries with a ProvenNonzero verdict.
// A nonzero entry with an Unknown verdict aborts with policy.undecided when
// no certified pivot remains.
RowReduction row_reduce(ExprMatrix m, const PivotPolicy& policy);

// Basis of the right null space, one vector per free column (in order).
std::vector<std::vector<Expr>> null_space(const RowReduction& r, std::size_t columns);

// Exact determinant over the field of fractions.
Expr determinant(ExprMatrix m);

ExprMatrix transpose(const ExprMatrix& m);
ExprMatrix submatrix(const ExprMatrix& m, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols);

// Scales v by a common factor so every entry is a polynomial, the entries
// share no polynomial or rational content, and the first nonzero entry has
// a positive leading coefficient.
std::vector<Expr> clear_denominators(const std::vector<Expr>& v);

Eigen::MatrixXd evaluate(const ExprMatrix& m, const Assignment& p);
// Number of singular values above `threshold`.
std::size_t numeric_rank(const Eigen::MatrixXd& m, double threshold = 1e-8);

// All k-element subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k);

}  // namespace pfaffian
