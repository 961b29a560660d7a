#include "pfaffian/integrals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"
#include "pfaffian/linalg.hpp"

namespace pfaffian {

namespace {

constexpr const char* kModule = "integral-finder";

// Antiderivatives of x^k cos(x)^m sin(x)^e (e <= 1) in x, from
//   I(k,m,1) = -x^k c^(m+1)/(m+1) + k/(m+1) I(k-1,m+1,0)
//   m I(k,m,0) = x^k c^(m-1) s - k I(k-1,m-1,1) + (m-1) I(k,m-2,0).
class TrigPrimitives {
 public:
  explicit TrigPrimitives(SymbolId s) : x_(Expr::symbol(s)), c_(Expr::cos(s)), s_(Expr::sin(s)) {}

  Expr get(std::uint32_t k, std::uint32_t m, std::uint32_t e) {
    const auto key = std::make_tuple(k, m, e);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expr r;
    if (e == 1) {
      r = -(x_.pow(static_cast<int>(k)) * c_.pow(static_cast<int>(m + 1))) / Expr(static_cast<long>(m + 1));
      if (k > 0) r += Expr(Rational(k, m + 1)) * get(k - 1, m + 1, 0);
    } else if (m == 0) {
      r = x_.pow(static_cast<int>(k + 1)) / Expr(static_cast<long>(k + 1));
    } else {
      r = x_.pow(static_cast<int>(k)) * c_.pow(static_cast<int>(m - 1)) * s_;
      if (k > 0) r -= Expr(static_cast<long>(k)) * get(k - 1, m - 1, 1);
      if (m >= 2) r += Expr(static_cast<long>(m - 1)) * get(k, m - 2, 0);
      r = r / Expr(static_cast<long>(m));
    }
    memo_.emplace(key, r);
    return r;
  }

 private:
  Expr x_, c_, s_;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, Expr> memo_;
};

bool mentions(const Poly& p, SymbolId s) {
  return p.contains(make_var(AtomKind::Symbol, s)) || p.contains(make_var(AtomKind::Cos, s)) ||
         p.contains(make_var(AtomKind::Sin, s));
}

// Antiderivative in the state s, or nullopt when the denominator depends on s.
std::optional<Expr> antiderivative(const Expr& e, SymbolId s) {
  if (mentions(e.denominator(), s)) return std::nullopt;
  const Var xv = make_var(AtomKind::Symbol, s), cv = make_var(AtomKind::Cos, s), sv = make_var(AtomKind::Sin, s);
  TrigPrimitives prim(s);
  Expr acc;
  for (const auto& [m, c] : e.numerator().terms()) {
    const Expr rest = Expr::polynomial(Poly::term(m.without(xv).without(cv).without(sv), c));
    acc += rest * prim.get(m.degree_in(xv), m.degree_in(cv), m.degree_in(sv));
  }
  return acc / Expr::polynomial(e.denominator());
}

std::string classification_reason_nonzero(const SymbolTable& symbols, std::size_t i) {
  return "coefficient of d" + symbols.name(static_cast<SymbolId>(i));
}

bool states_free(const Expr& e, std::size_t n) {
  for (SymbolId s : e.symbols()) {
    if (s < n) return false;
  }
  return true;
}

}  // namespace

const char* to_string(Classification c) {
  switch (c) {
    case Classification::FirstIntegral: return "FirstIntegral";
    case Classification::GeneralizedFirstIntegral: return "GeneralizedFirstIntegral";
    case Classification::Rejected: return "Rejected";
    case Classification::Undetermined: return "Undetermined";
  }
  return "?";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::FromFlag: return "FromFlag";
    case Provenance::FromTorsionMinors: return "FromTorsionMinors";
    case Provenance::UserDeclared: return "UserDeclared";
  }
  return "?";
}

// ----------------------------------------------------------- zero locus

ZeroLocusSampler::ZeroLocusSampler(std::vector<Expr> rho, const Domain& domain, std::size_t n)
    : rho_(std::move(rho)), domain_(domain), n_(n) {
  for (const auto& r : rho_) {
    std::vector<Expr> grad;
    for (SymbolId s = 0; s < n_; ++s) grad.push_back(differentiate(r, s));
    gradient_.push_back(std::move(grad));
  }
  if (rho_.size() == 1) {
    const Expr& r = rho_[0];
    for (SymbolId s = 0; s < n_ && !linear_state_; ++s) {
      const Var xv = make_var(AtomKind::Symbol, s);
      const Poly& num = r.numerator();
      if (num.degree_in(xv) == 1 && !num.contains(make_var(AtomKind::Cos, s)) &&
          !num.contains(make_var(AtomKind::Sin, s)) && !mentions(r.denominator(), s)) {
        linear_state_ = s;
      }
    }
  }
}

Eigen::MatrixXd ZeroLocusSampler::jacobian(const Assignment& p) const { return evaluate(gradient_, p); }

std::optional<Assignment> ZeroLocusSampler::sample(Rng& rng, int attempts) const {
  const std::size_t d = rho_.size();
  auto residual = [&](const Assignment& p) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) r(static_cast<Eigen::Index>(i)) = evaluate(rho_[i], p);
    return r;
  };
  for (int attempt = 0; attempt < attempts; ++attempt) {
    Assignment p = domain_.sample(rng);
    try {
      if (linear_state_) {
        const SymbolId s = *linear_state_;
        const double slope = evaluate(gradient_[0][s], p);
        if (std::abs(slope) < 1e-9) continue;
        p[s] = 0.0;
        p[s] = -evaluate(rho_[0], p) / slope;
      }
      // Converged means a small residual and a small Newton correction; the
      // latter fails near degenerate zeros, where Newton is only linear.
      Eigen::VectorXd r = residual(p);
      for (int step = 0; step <= kNewtonSteps; ++step) {
        const Eigen::VectorXd delta = jacobian(p).completeOrthogonalDecomposition().solve(r);
        if (!delta.allFinite()) break;
        if (r.lpNorm<Eigen::Infinity>() <= kZeroLocusResidual && delta.lpNorm<Eigen::Infinity>() <= kNewtonCorrection) {
          if (domain_.satisfies(p)) return p;
          break;
        }
        if (step == kNewtonSteps) break;
        double alpha = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 12 && !improved; ++halving, alpha /= 2) {
          Assignment q = p;
          for (SymbolId s = 0; s < n_; ++s) q[s] -= alpha * delta(static_cast<Eigen::Index>(s));
          try {
            const Eigen::VectorXd rq = residual(q);
            if (rq.norm() < r.norm() || rq.norm() == 0.0) {
              p = std::move(q);
              r = rq;
              improved = true;
            }
          } catch (const Error&) {
          }
        }
        if (!improved) break;
      }
    } catch (const Error&) {
      // singular draw; resample
    }
  }
  return std::nullopt;
}

bool non_degenerate(const std::vector<Expr>& rho, const Domain& domain, std::size_t n, std::uint64_t seed,
                    std::string* why) {
  const ZeroLocusSampler sampler(rho, domain, n);
  Rng rng(seed);
  for (int i = 0; i < kNonDegeneracyPoints; ++i) {
    const auto p = sampler.sample(rng);
    if (!p) {
      if (why) *why = "no point of the zero locus found in the domain";
      return false;
    }
    try {
      if (numeric_rank(sampler.jacobian(*p), kNonzeroThreshold) < rho.size()) {
        if (why) *why = "d rho^1 ^ ... ^ d rho^d vanishes at a zero-locus point";
        return false;
      }
    } catch (const Error&) {
      if (why) *why = "d rho is singular at a zero-locus point";
      return false;
    }
  }
  return true;
}

// ----------------------------------------------------------- first integrals

std::optional<Expr> poincare_integrate(const DifferentialForm& omega) {
  if (omega.degree() != 1) throw Error(ErrorKind::InvalidArgument, kModule, "poincare_integrate needs a 1-form");
  if (!d(omega).is_zero()) throw Error(ErrorKind::NotClosed, kModule, "1-form is not closed");
  const std::size_t n = omega.n();
  const auto a = omega.components();
  Expr rho;
  for (SymbolId i = 0; i < n; ++i) {
    const Expr r = a[i] - differentiate(rho, i);
    if (r.is_zero()) continue;
    const auto part = antiderivative(r, i);
    if (!part) return std::nullopt;
    rho += *part;
  }
  if (d(DifferentialForm::scalar(n, rho)) != omega) return std::nullopt;
  try {
    Expr origin = rho;
    for (SymbolId s = 0; s < n; ++s) origin = substitute(origin, s, Expr(0));
    rho -= origin;
  } catch (const Error&) {
    // undefined at the origin; any constant shift is a first integral too
  }
  return rho;
}

std::vector<CandidateIntegral> first_integrals(const PfaffianFlag& flag, const ControlAffineSystem& sys) {
  std::vector<CandidateIntegral> out;
  const auto& gens = flag.terminal().generators;
  const std::size_t q = gens.size();
  if (q == 0) return out;
  const std::size_t n = sys.n();
  std::vector<bool> resolved(q, false);
  std::size_t found = 0;

  auto emit = [&](const DifferentialForm& omega) {
    CandidateIntegral c;
    c.provenance = Provenance::FromFlag;
    c.exactness_witness = omega;
    const auto rho = poincare_integrate(omega);
    if (!rho) {
      c.classification = Classification::Undetermined;
      c.reason = "closed generator has no antiderivative in the expression class";
      out.push_back(std::move(c));
      return false;
    }
    c.rho = {*rho};
    const auto drho = d(DifferentialForm::scalar(n, *rho));
    for (const auto& X : sys.fields()) {
      if (!contract(drho, X).is_zero()) {
        c.classification = Classification::Undetermined;
        c.reason = "integral is not annihilated by every field";
        out.push_back(std::move(c));
        return false;
      }
    }
    c.classification = Classification::FirstIntegral;
    out.push_back(std::move(c));
    ++found;
    return true;
  };

  std::vector<DifferentialForm> dg;
  for (const auto& g : gens) dg.push_back(d(g));
  for (std::size_t i = 0; i < q && found < q; ++i) {
    if (!dg[i].is_zero()) continue;
    resolved[i] = true;
    emit(gens[i]);
  }
  // Constant-coefficient pairs g_i + c g_j with d g_i + c d g_j = 0.
  for (std::size_t i = 0; i < q && found < q; ++i) {
    if (resolved[i]) continue;
    for (std::size_t j = 0; j < q && !resolved[i]; ++j) {
      if (j == i || dg[j].is_zero()) continue;
      const auto& [index, b] = *dg[j].terms().begin();
      const Expr c = -dg[i].coefficient(index) / b;
      if (!states_free(c, n)) continue;
      if (!(dg[i] + c * dg[j]).is_zero()) continue;
      resolved[i] = true;
      emit(gens[i] + c * gens[j]);
    }
  }
  for (std::size_t i = 0; i < q; ++i) {
    if (resolved[i]) continue;
    CandidateIntegral c;
    c.provenance = Provenance::FromFlag;
    c.classification = Classification::Undetermined;
    c.reason = "generator is not closed: d theta = " + dg[i].to_string(sys.symbols);
    c.exactness_witness = gens[i];
    out.push_back(std::move(c));
  }
  return out;
}

// ----------------------------------------------------------- torsion minors

std::vector<Expr> gfi_candidates(const TorsionMatrix& T, std::size_t s, std::size_t dmax, const Domain& domain,
                                 std::size_t n, std::uint64_t seed) {
  std::vector<Expr> out;
  std::vector<Poly> seen;
  if (T.is_zero()) return out;
  const std::size_t rows = T.entries.size();
  const std::size_t cols = rows ? T.entries[0].size() : 0;
  std::uint64_t k = 0;
  for (std::size_t d = 1; d <= std::min(dmax, s); ++d) {
    const std::size_t size = s - d + 1;
    if (size > rows || size > cols) continue;
    std::vector<Poly> minors;
    for (const auto& r : combinations(rows, size)) {
      for (const auto& c : combinations(cols, size)) {
        const Expr det = determinant(submatrix(T.entries, r, c));
        if (det.is_zero()) continue;
        if (!det.is_polynomial() && !domain.is_assumed_nonzero(Expr::polynomial(det.denominator()))) {
          throw Error(ErrorKind::NotPolynomial, kModule,
                      "torsion minor has a denominator that may vanish: " +
                          to_string(det.denominator(), domain.symbols()));
        }
        minors.push_back(det.numerator());
      }
    }
    if (minors.empty()) continue;
    for (const auto& [f, mult] : factor(minors.front()).factors) {
      (void)mult;
      if (f.is_constant()) continue;
      const Expr fe = Expr::polynomial(f);
      if (states_free(fe, n) || domain.is_assumed_nonzero(fe)) continue;
      bool common = true;
      for (std::size_t i = 1; i < minors.size() && common; ++i) common = divide_exact(minors[i], f).has_value();
      if (!common) continue;
      const Poly key = unit_normal(f);
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      if (!non_degenerate({fe}, domain, n, derive_seed(seed, ++k))) continue;
      out.push_back(Expr::polynomial(key));
    }
  }
  return out;
}

// ----------------------------------------------------------- membership

CandidateIntegral check_membership(const std::vector<Expr>& rho, const PfaffianSystem& theta,
                                   const ControlAffineSystem& sys, const Domain& domain, std::uint64_t seed) {
  CandidateIntegral out;
  out.rho = rho;
  const std::size_t n = sys.n();
  std::string why;
  if (!non_degenerate(rho, domain, n, derive_seed(seed, 1), &why)) {
    out.classification = Classification::Rejected;
    out.reason = "NonDegeneracyFailure: " + why;
    return out;
  }
  std::optional<Reducer> reducer;
  if (theta.rank() > 0) reducer.emplace(theta.generators, theta.pivots, domain, derive_seed(seed, 2));

  bool all_zero = true;
  std::vector<Expr> unproven;  // coefficients left to the numeric fallback
  for (const auto& r : rho) {
    MembershipEvidence ev;
    const auto dr = d(DifferentialForm::scalar(n, r));
    ev.reduced = reducer ? reducer->reduce(dr) : dr;
    for (const auto& [index, c] : ev.reduced.terms()) {
      all_zero = false;
      std::vector<Expr> q;
      if (rho.size() == 1) {
        const auto quotient = divide_exact(c, rho[0]);
        if (!quotient) {
          out.classification = Classification::Rejected;
          out.reason = classification_reason_nonzero(sys.symbols, index[0]) + " is not divisible by rho";
          out.failing_coefficient = c;
          out.membership.push_back(std::move(ev));
          return out;
        }
        q.push_back(*quotient);
      } else {
        // Sequential division of the numerator by rho^1..rho^d.
        Poly rest = c.numerator();
        const Expr den = Expr::polynomial(c.denominator());
        for (const auto& rn : rho) {
          auto [quo, rem] = divide_with_remainder(rest, rn.numerator());
          q.push_back(Expr::polynomial(quo) * Expr::polynomial(rn.denominator()) / den);
          rest = std::move(rem);
        }
        if (!rest.is_zero()) unproven.push_back(c);
      }
      ev.coordinates.push_back(index[0]);
      ev.quotients.push_back(std::move(q));
    }
    out.membership.push_back(std::move(ev));
  }
  if (rho.size() == 1) {
    const auto drho = d(DifferentialForm::scalar(n, rho[0]));
    for (const auto& X : sys.fields()) {
      const Expr xr = contract(drho, X);
      out.field_certificates.push_back(xr.is_zero() ? std::optional<Expr>(Expr(0)) : divide_exact(xr, rho[0]));
    }
  }
  if (all_zero) {
    out.classification = Classification::FirstIntegral;
    return out;
  }
  if (unproven.empty()) {
    out.classification = Classification::GeneralizedFirstIntegral;
    return out;
  }
  const ZeroLocusSampler sampler(rho, domain, n);
  Rng rng(derive_seed(seed, 3));
  for (int i = 0; i < kMembershipFallbackPoints; ++i) {
    const auto p = sampler.sample(rng);
    if (!p) break;
    for (const auto& c : unproven) {
      double v = 0.0;
      try {
        v = evaluate(c, *p);
      } catch (const Error&) {
        continue;
      }
      if (std::abs(v) > kMembershipFallbackTolerance) {
        out.classification = Classification::Rejected;
        out.reason = "reduced coefficient does not vanish on the zero locus";
        out.failing_coefficient = c;
        return out;
      }
    }
  }
  out.classification = Classification::Undetermined;
  out.numeric_only = true;
  out.reason = "sequential division left a remainder; coefficients vanish numerically on the zero locus";
  out.failing_coefficient = unproven.front();
  return out;
}

}  // namespace pfaffian
