#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pfaffian/domain.hpp"
#include "pfaffian/expr.hpp"

namespace pfaffian {

using FieldComponents = std::vector<Expr>;

// x' = f(x) + sum_j g_j(x) u_j over a single global chart.
struct ControlAffineSystem {
  SymbolTable symbols;
  FieldComponents drift;  // all-zero when the file declares none
  std::vector<std::string> control_names;
  std::vector<FieldComponents> controls;
  std::vector<std::string> candidate_names;
  std::vector<Expr> candidates;
  std::vector<Expr> assume_nonzero;

  std::size_t n() const { return symbols.state_count(); }
  std::size_t m() const { return controls.size(); }
  bool has_drift() const;
  // f followed by g_1..g_m.
  std::vector<FieldComponents> fields() const;
  Domain domain() const { return Domain(symbols, assume_nonzero); }
};

struct ControlPiece {
  double duration = 0.0;
  std::vector<double> value;
};

// Piecewise-constant control with finitely many pieces.
struct ControlSchedule {
  std::vector<ControlPiece> pieces;
  double horizon() const;
};

// Throws SyntaxError, UnknownSymbol, ArityMismatch or EmptyControlSet.
ControlAffineSystem parse_system(std::string_view text);

// Throws SyntaxError or UnknownSymbol. Positions in diagnostics are 1-based
// and offset by `line` / `column_offset` when parsing part of a file.
Expr parse_expr(std::string_view text, const SymbolTable& symbols, std::size_t line = 1,
                std::size_t column_offset = 0);

// Canonical rendering accepted by parse_system.
std::string print_system(const ControlAffineSystem& sys);

}  // namespace pfaffian
