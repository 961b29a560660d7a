#include "pfaffian/domain.hpp"

#include <algorithm>
#include <cmath>

#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"

namespace pfaffian {

Domain::Domain(SymbolTable symbols, std::vector<Expr> nonzero) : symbols_(std::move(symbols)) {
  for (const Expr& e : nonzero) add_constraint(e);
}

void Domain::add_constraint(const Expr& e) {
  if (e.is_constant()) return;
  for (const Expr& existing : nonzero_) {
    if (existing == e) return;
  }
  nonzero_.push_back(e);
  for (const Poly* part : {&e.numerator(), &e.denominator()}) {
    for (const auto& [f, m] : factor(*part).factors) {
      if (std::find(constraint_factors_.begin(), constraint_factors_.end(), f) == constraint_factors_.end()) {
        constraint_factors_.push_back(f);
      }
    }
  }
}

bool Domain::satisfies(const Assignment& p, double margin) const {
  for (const Expr& c : nonzero_) {
    try {
      if (!(std::abs(evaluate(c, p)) > margin)) return false;
    } catch (const Error&) {
      return false;
    }
  }
  return true;
}

namespace {
double draw(Rng& rng, ParamSign sign) {
  const auto den = rng.integer(1, 9);
  std::int64_t num = 0;
  switch (sign) {
    case ParamSign::Positive: num = rng.integer(1, 2 * den); break;
    case ParamSign::Negative: num = -rng.integer(1, 2 * den); break;
    case ParamSign::Nonzero:
      num = rng.integer(1, 2 * den);
      if (rng.uniform() < 0.5) num = -num;
      break;
    case ParamSign::Any: num = rng.integer(-2 * den, 2 * den); break;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

Assignment Domain::sample(Rng& rng, const std::vector<SymbolId>& extra) const {
  std::vector<SymbolId> ids;
  for (SymbolId s = 0; s < symbols_.size(); ++s) ids.push_back(s);
  for (SymbolId s : extra) {
    if (s >= symbols_.size()) ids.push_back(s);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Assignment point;
  for (int attempt = 0; attempt < 200; ++attempt) {
    point.clear();
    for (SymbolId s : ids) point[s] = draw(rng, s < symbols_.size() ? symbols_.sign(s) : ParamSign::Any);
    if (satisfies(point)) return point;
  }
  return point;
}

bool Domain::is_assumed_nonzero(const Expr& e) const {
  if (e.is_zero()) return false;
  for (const Poly* part : {&e.numerator(), &e.denominator()}) {
    for (const auto& [f, m] : factor(*part).factors) {
      if (std::find(constraint_factors_.begin(), constraint_factors_.end(), f) != constraint_factors_.end()) continue;
      const auto vars = f.variables();
      const bool signed_param = vars.size() == 1 && f.size() == 1 && kind_of(vars[0]) == AtomKind::Symbol &&
                                symbols_.is_param(symbol_of(vars[0])) &&
                                symbols_.sign(symbol_of(vars[0])) != ParamSign::Any;
      if (!signed_param) return false;
    }
  }
  return true;
}

ZeroVerdict is_zero(const Expr& e, std::uint64_t seed, const Domain& domain, int points) {
  ZeroVerdict verdict;
  if (e.is_zero()) {
    verdict.status = ZeroStatus::ProvenZero;
    return verdict;
  }
  if (e.is_constant()) {
    verdict.status = ZeroStatus::ProvenNonzero;
    verdict.witness = Assignment{};
    verdict.witness_value = e.constant_value().get_d();
    return verdict;
  }
  Rng rng(seed);
  const auto symbols = e.symbols();
  for (int i = 0; i < points; ++i) {
    Assignment p = domain.sample(rng, symbols);
    double value = 0.0;
    try {
      value = evaluate(e, p);
    } catch (const Error&) {
      continue;
    }
    if (std::abs(value) > kNonzeroThreshold) {
      verdict.status = ZeroStatus::ProvenNonzero;
      verdict.witness = std::move(p);
      verdict.witness_value = value;
      return verdict;
    }
  }
  verdict.status = ZeroStatus::Unknown;
  return verdict;
}

const char* to_string(ZeroStatus status) {
  switch (status) {
    case ZeroStatus::ProvenZero: return "ProvenZero";
    case ZeroStatus::ProvenNonzero: return "ProvenNonzero";
    case ZeroStatus::Unknown: return "Unknown";
  }
  return "Unknown";
}

}  // namespace pfaffian
