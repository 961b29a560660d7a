#include "pfaffian/flag.hpp"

#include <cassert>

#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"

namespace pfaffian {

namespace {

constexpr const char* kModule = "flag-analyzer";

DifferentialForm make_generator(const std::vector<Expr>& coefficients) {
  return DifferentialForm::one_form(clear_denominators(coefficients));
}

std::string describe_point(const Assignment& p, const SymbolTable& symbols) {
  std::string out;
  for (const auto& [s, v] : p) {
    if (!out.empty()) out += ", ";
    out += symbols.name(s) + "=" + std::to_string(v);
  }
  return out;
}

}  // namespace

ExprMatrix PfaffianSystem::coefficient_matrix() const {
  ExprMatrix m;
  for (const auto& g : generators) m.push_back(g.components());
  return m;
}

bool TorsionMatrix::is_zero() const {
  for (const auto& row : entries) {
    for (const auto& e : row) {
      if (!e.is_zero()) return false;
    }
  }
  return true;
}

void check_rank_constancy(const ExprMatrix& m, std::size_t rank, const Domain& domain, std::uint64_t seed,
                          const char* what) {
  if (m.empty()) return;
  Rng rng(seed);
  for (int i = 0; i < kRankSamplePoints; ++i) {
    const Assignment p = domain.sample(rng);
    std::size_t numeric = 0;
    try {
      numeric = numeric_rank(evaluate(m, p), kRankThreshold);
    } catch (const Error&) {
      continue;  // singular sample point of a quotient entry
    }
    if (numeric != rank) {
      throw Error(ErrorKind::RankNotConstant, kModule,
                  std::string(what) + " has symbolic rank " + std::to_string(rank) + " but numeric rank " +
                      std::to_string(numeric) + " at " + describe_point(p, domain.symbols()));
    }
  }
}

PfaffianSystem annihilator(const ControlAffineSystem& sys, const Domain& domain, std::uint64_t seed) {
  ExprMatrix fields;
  for (const auto& f : sys.fields()) fields.push_back(f);
  PivotPolicy policy{domain, derive_seed(seed, 1), ErrorKind::RankNotConstant, kModule};
  const RowReduction r = row_reduce(fields, policy);
  check_rank_constancy(fields, r.rank(), domain, derive_seed(seed, 2), "field matrix");
  PfaffianSystem theta;
  for (const auto& v : null_space(r, sys.n())) theta.generators.push_back(make_generator(v));
  return theta;
}

std::vector<std::size_t> complete_coframe(PfaffianSystem& theta, Domain& domain, std::uint64_t seed) {
  const std::size_t s = theta.rank();
  const std::size_t n = s ? theta.generators[0].n() : 0;
  theta.pivots.clear();
  theta.pivot_determinant = Expr(1);
  if (s == 0) return {};
  const ExprMatrix a = theta.coefficient_matrix();
  const auto all_rows = combinations(s, s).front();
  std::vector<std::size_t> best;
  Expr best_det;
  int best_class = 3;
  std::uint64_t k = 0;
  for (const auto& cols : combinations(n, s)) {
    const Expr det = determinant(submatrix(a, all_rows, cols));
    ++k;
    if (det.is_zero()) continue;
    const int cls = static_cast<int>(classify_pivot(det, domain));
    if (cls >= best_class) continue;
    if (cls == static_cast<int>(PivotClass::ProvenNonzero) &&
        is_zero(det, derive_seed(seed, k), domain).status != ZeroStatus::ProvenNonzero) {
      continue;
    }
    best_class = cls;
    best = cols;
    best_det = det;
    if (cls == 0) break;
  }
  if (best.empty()) {
    throw Error(ErrorKind::NoValidCompletion, kModule, "no coordinate coframe completes the Pfaffian system");
  }
  theta.pivots = best;
  theta.pivot_determinant = best_det;
  if (best_class == static_cast<int>(PivotClass::ProvenNonzero) && best_det.is_polynomial()) {
    // Record only the factors not already known to be nonzero.
    const ExprFactorization f = factor(best_det);
    Expr fresh(1);
    for (const auto& [p, mult] : f.factors) {
      if (!domain.is_assumed_nonzero(p)) fresh = fresh * p;
    }
    if (!fresh.is_constant()) {
      domain.add_constraint(fresh);
      theta.constraints.push_back(fresh);
    }
  } else if (best_class == static_cast<int>(PivotClass::ProvenNonzero)) {
    domain.add_constraint(best_det);
    theta.constraints.push_back(best_det);
  }
  std::vector<std::size_t> coframe;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(best.begin(), best.end(), i) == best.end()) coframe.push_back(i);
  }
  return coframe;
}

TorsionMatrix torsion(const PfaffianSystem& theta, const Domain& domain, std::uint64_t seed) {
  TorsionMatrix t;
  const Reducer reducer(theta.generators, theta.pivots, domain, seed);
  t.coframe = reducer.free();
  const std::size_t p = t.coframe.size();
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) t.columns.emplace_back(j, k);
  }
  for (const auto& g : theta.generators) {
    const DifferentialForm reduced = reducer.reduce(d(g));
    std::vector<Expr> row;
    for (const auto& [j, k] : t.columns) row.push_back(reduced.coefficient({t.coframe[j], t.coframe[k]}));
    t.entries.push_back(std::move(row));
  }
  return t;
}

PfaffianSystem derived_system(const PfaffianSystem& theta, const TorsionMatrix& T, const Domain& domain,
                              std::uint64_t seed, std::size_t* torsion_rank) {
  const std::size_t s = theta.rank();
  PfaffianSystem next;
  ExprMatrix tt = transpose(T.entries);
  std::vector<std::vector<Expr>> kernel;
  std::size_t rank = 0;
  if (tt.empty()) {
    for (std::size_t g = 0; g < s; ++g) {
      std::vector<Expr> e(s);
      e[g] = Expr(1);
      kernel.push_back(std::move(e));
    }
  } else {
    PivotPolicy policy{domain, seed, ErrorKind::RankUndecidable, kModule};
    const RowReduction r = row_reduce(tt, policy);
    rank = r.rank();
    kernel = null_space(r, s);
  }
  if (torsion_rank) *torsion_rank = rank;
  for (const auto& a : kernel) {
    DifferentialForm combo(theta.generators[0].n(), 1);
    for (std::size_t g = 0; g < s; ++g) {
      if (!a[g].is_zero()) combo = combo + a[g] * theta.generators[g];
    }
    next.generators.push_back(make_generator(combo.components()));
  }
  return next;
}

PfaffianFlag derived_flag(const ControlAffineSystem& sys, std::uint64_t seed) {
  PfaffianFlag flag;
  flag.domain = sys.domain();
  PfaffianSystem current = annihilator(sys, flag.domain, derive_seed(seed, 100));
  for (std::uint64_t level = 0;; ++level) {
    const std::uint64_t level_seed = derive_seed(seed, 1000 + level);
    FlagLevel entry;
    check_rank_constancy(current.coefficient_matrix(), current.rank(), flag.domain, derive_seed(level_seed, 1),
                         "generator matrix");
    if (current.rank() > 0) {
      complete_coframe(current, flag.domain, derive_seed(level_seed, 2));
      entry.torsion = torsion(current, flag.domain, derive_seed(level_seed, 3));
    }
    PfaffianSystem next;
    const bool terminal = current.rank() == 0 || entry.torsion.is_zero();
    if (!terminal) {
      next = derived_system(current, entry.torsion, flag.domain, derive_seed(level_seed, 4), &entry.torsion_rank);
      assert(next.rank() < current.rank());
    }
    entry.system = std::move(current);
    flag.levels.push_back(std::move(entry));
    if (terminal) break;
    current = std::move(next);
  }
  flag.nu = flag.levels.size() - 1;
  flag.q = flag.terminal().rank();
  return flag;
}

}  // namespace pfaffian
