#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pfaffian/expr.hpp"
#include "pfaffian/rng.hpp"

namespace pfaffian {

// Working domain of a system: its symbols (with parameter sign constraints)
// plus expressions required to be nonzero. Used for random sampling and for
// deciding whether an expression is nonzero by assumption.
class Domain {
 public:
  Domain() = default;
  explicit Domain(SymbolTable symbols, std::vector<Expr> nonzero = {});

  const SymbolTable& symbols() const { return symbols_; }
  const std::vector<Expr>& nonzero() const { return nonzero_; }
  void add_constraint(const Expr& e);

  // Every constraint has |value| > margin at p (and evaluates).
  bool satisfies(const Assignment& p, double margin = 1e-6) const;

  // Random rational point covering every symbol of the table and the extra
  // symbols listed; parameter sign constraints are honoured and points
  // violating a constraint are redrawn.
  Assignment sample(Rng& rng, const std::vector<SymbolId>& extra = {}) const;

  // True when every irreducible factor of numerator and denominator is a
  // nonzero constant, a sign-constrained parameter, or a factor of a
  // recorded constraint.
  bool is_assumed_nonzero(const Expr& e) const;

 private:
  SymbolTable symbols_;
  std::vector<Expr> nonzero_;
  std::vector<Poly> constraint_factors_;
};

enum class ZeroStatus { ProvenZero, ProvenNonzero, Unknown };

struct ZeroVerdict {
  ZeroStatus status = ZeroStatus::Unknown;
  std::optional<Assignment> witness;
  double witness_value = 0.0;
};

inline constexpr int kZeroTestPoints = 8;
inline constexpr double kNonzeroThreshold = 1e-9;

// Three-valued zero test: canonical form first, then evaluation at random
// rational points drawn from the domain.
ZeroVerdict is_zero(const Expr& e, std::uint64_t seed, const Domain& domain = {},
                    int points = kZeroTestPoints);

const char* to_string(ZeroStatus status);

}  // namespace pfaffian
