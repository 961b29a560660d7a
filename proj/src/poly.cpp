#include "pfaffian/poly.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <iterator>
#include <map>
#include <optional>

namespace pfaffian {

// ---------------------------------------------------------------- Monomial

Monomial Monomial::of(Var v, std::uint32_t exponent) {
  Monomial m;
  if (exponent > 0) {
    m.powers_.emplace_back(v, exponent);
    m.degree_ = exponent;
  }
  return m;
}

std::uint32_t Monomial::degree_in(Var v) const {
  for (const auto& [var, e] : powers_) {
    if (var == v) return e;
    if (var > v) break;
  }
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out;
  out.powers_.reserve(powers_.size() + other.powers_.size());
  auto a = powers_.begin();
  auto b = other.powers_.begin();
  while (a != powers_.end() || b != other.powers_.end()) {
    if (b == other.powers_.end() || (a != powers_.end() && a->first < b->first)) {
      out.powers_.push_back(*a++);
    } else if (a == powers_.end() || b->first < a->first) {
      out.powers_.push_back(*b++);
    } else {
      out.powers_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  out.degree_ = degree_ + other.degree_;
  return out;
}

bool Monomial::divides(const Monomial& other) const {
  auto b = other.powers_.begin();
  for (const auto& [v, e] : powers_) {
    while (b != other.powers_.end() && b->first < v) ++b;
    if (b == other.powers_.end() || b->first != v || b->second < e) return false;
  }
  return true;
}

Monomial Monomial::operator/(const Monomial& divisor) const {
  Monomial out;
  auto d = divisor.powers_.begin();
  for (const auto& [v, e] : powers_) {
    std::uint32_t sub = 0;
    if (d != divisor.powers_.end() && d->first == v) {
      sub = d->second;
      ++d;
    }
    assert(sub <= e);
    if (e > sub) out.powers_.emplace_back(v, e - sub);
  }
  out.degree_ = degree_ - divisor.degree_;
  return out;
}

Monomial Monomial::without(Var v) const {
  Monomial out;
  for (const auto& p : powers_) {
    if (p.first != v) {
      out.powers_.push_back(p);
      out.degree_ += p.second;
    }
  }
  return out;
}

Monomial Monomial::with_power(Var v, std::uint32_t exponent) const {
  Monomial out = without(v);
  if (exponent == 0) return out;
  auto pos = std::lower_bound(out.powers_.begin(), out.powers_.end(), Power{v, 0});
  out.powers_.insert(pos, Power{v, exponent});
  out.degree_ += exponent;
  return out;
}

Monomial Monomial::gcd(const Monomial& other) const {
  Monomial out;
  auto b = other.powers_.begin();
  for (const auto& [v, e] : powers_) {
    while (b != other.powers_.end() && b->first < v) ++b;
    if (b != other.powers_.end() && b->first == v) {
      const auto m = std::min(e, b->second);
      out.powers_.emplace_back(v, m);
      out.degree_ += m;
    }
  }
  return out;
}

bool GrlexDescending::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() > b.degree();
  const auto& pa = a.powers();
  const auto& pb = b.powers();
  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    if (i == pa.size()) return false;
    if (j == pb.size()) return true;
    if (pa[i].first != pb[j].first) return pa[i].first < pb[j].first;
    if (pa[i].second != pb[j].second) return pa[i].second > pb[j].second;
    ++i;
    ++j;
  }
}

// -------------------------------------------------------------------- Poly

Poly::Poly(const Rational& constant) {
  if (constant != 0) terms_.emplace(Monomial{}, constant);
}

Poly Poly::variable(Var v) { return term(Monomial::of(v), 1); }

Poly Poly::term(const Monomial& m, const Rational& c) {
  Poly p;
  if (c != 0) p.terms_.emplace(m, c);
  return p;
}

bool Poly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

Rational Poly::constant_value() const {
  if (terms_.empty()) return 0;
  return terms_.begin()->second;
}

std::uint32_t Poly::total_degree() const {
  return terms_.empty() ? 0 : terms_.begin()->first.degree();
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Poly Poly::operator-() const {
  Poly out = *this;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

Poly& Poly::operator+=(const Poly& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Poly& Poly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, coeff] : terms_) coeff *= c;
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) out.add_term(ma * mb, ca * cb);
  }
  return out;
}

Poly Poly::pow(std::uint32_t exponent) const {
  Poly result(1);
  Poly base = *this;
  while (exponent > 0) {
    if (exponent & 1u) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

Poly Poly::multiply_monomial(const Monomial& m, const Rational& c) const {
  Poly out;
  if (c == 0) return out;
  for (const auto& [mt, ct] : terms_) out.terms_.emplace_hint(out.terms_.end(), mt * m, ct * c);
  return out;
}

bool Poly::contains(Var v) const {
  for (const auto& [m, c] : terms_) {
    if (m.degree_in(v) > 0) return true;
  }
  return false;
}

std::uint32_t Poly::degree_in(Var v) const {
  std::uint32_t d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree_in(v));
  return d;
}

std::map<std::uint32_t, Poly> Poly::coefficients_in(Var v) const {
  std::map<std::uint32_t, Poly> out;
  for (const auto& [m, c] : terms_) out[m.degree_in(v)].add_term(m.without(v), c);
  return out;
}

Poly Poly::leading_coefficient_in(Var v) const {
  const auto d = degree_in(v);
  Poly out;
  for (const auto& [m, c] : terms_) {
    if (m.degree_in(v) == d) out.add_term(m.without(v), c);
  }
  return out;
}

std::vector<Var> Poly::variables() const {
  std::vector<Var> vars;
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, e] : m.powers()) vars.push_back(v);
  }
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

std::vector<SymbolId> Poly::symbols() const {
  std::vector<SymbolId> out;
  for (Var v : variables()) out.push_back(symbol_of(v));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Poly Poly::derivative(SymbolId s) const {
  const Var plain = make_var(AtomKind::Symbol, s);
  const Var cosv = make_var(AtomKind::Cos, s);
  const Var sinv = make_var(AtomKind::Sin, s);
  Poly out;
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, e] : m.powers()) {
      if (symbol_of(v) != s) continue;
      const Monomial lowered = m.with_power(v, e - 1);
      if (v == plain) {
        out.add_term(lowered, c * e);
      } else if (v == cosv) {
        // d cos^e = -e cos^(e-1) sin
        out.add_term(lowered * Monomial::of(sinv), -c * e);
      } else if (v == sinv) {
        out.add_term(lowered * Monomial::of(cosv), c * e);
      }
    }
  }
  return out;
}

Poly Poly::substitute(Var v, const Poly& value) const {
  Poly out;
  std::map<std::uint32_t, Poly> powers;
  for (const auto& [m, c] : terms_) {
    const auto e = m.degree_in(v);
    if (e == 0) {
      out.add_term(m, c);
      continue;
    }
    auto it = powers.find(e);
    if (it == powers.end()) it = powers.emplace(e, value.pow(e)).first;
    out += it->second.multiply_monomial(m.without(v), c);
  }
  return out;
}

// ------------------------------------------------------------ free helpers

Poly reduce_trig(const Poly& p) {
  bool needed = false;
  for (const auto& [m, c] : p.terms()) {
    for (const auto& [v, e] : m.powers()) {
      if (kind_of(v) == AtomKind::Sin && e >= 2) needed = true;
    }
  }
  if (!needed) return p;
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    Poly term = Poly::term(Monomial{}, c);
    Monomial rest;
    for (const auto& [v, e] : m.powers()) {
      if (kind_of(v) == AtomKind::Sin && e >= 2) {
        const Var cosv = make_var(AtomKind::Cos, symbol_of(v));
        // sin^e = sin^(e mod 2) (1 - cos^2)^(e div 2)
        const Poly one_minus_cos2 = Poly(1) - Poly::variable(cosv).pow(2);
        term = term * one_minus_cos2.pow(e / 2);
        if (e % 2) rest = rest * Monomial::of(v);
      } else {
        rest = rest * Monomial::of(v, e);
      }
    }
    out += term.multiply_monomial(rest, 1);
  }
  return out;
}

Poly conjugate_sin(const Poly& p, SymbolId s) {
  const Var sinv = make_var(AtomKind::Sin, s);
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    out += Poly::term(m, m.degree_in(sinv) % 2 ? Rational(-c) : c);
  }
  return out;
}

std::pair<Poly, Poly> divide_with_remainder(const Poly& a, const Poly& b) {
  assert(!b.is_zero());
  Poly quotient;
  Poly remainder;
  Poly rest = a;
  const Monomial& lm = b.leading_monomial();
  const Rational& lc = b.leading_coefficient();
  while (!rest.is_zero()) {
    const Monomial m = rest.leading_monomial();
    const Rational c = rest.leading_coefficient();
    if (lm.divides(m)) {
      const Monomial qm = m / lm;
      const Rational qc = c / lc;
      quotient += Poly::term(qm, qc);
      rest -= b.multiply_monomial(qm, qc);
    } else {
      remainder += Poly::term(m, c);
      rest -= Poly::term(m, c);
    }
  }
  return {quotient, remainder};
}

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
  if (a.is_zero()) return Poly{};
  if (b.is_constant()) return a * Rational(1 / b.constant_value());
  if (a.total_degree() < b.total_degree()) return std::nullopt;
  auto [q, r] = divide_with_remainder(a, b);
  if (!r.is_zero()) return std::nullopt;
  return q;
}

Rational rational_content(const Poly& p) {
  if (p.is_zero()) return 0;
  mpz_class num = 0;
  mpz_class den = 1;
  for (const auto& [m, c] : p.terms()) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), num.get_mpz_t(), c.get_num_mpz_t());
    num = g;
    mpz_class l;
    mpz_lcm(l.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    den = l;
  }
  Rational out(num, den);
  out.canonicalize();
  return out;
}

Poly integer_primitive(const Poly& p) {
  if (p.is_zero()) return p;
  Rational c = rational_content(p);
  if (p.leading_coefficient() < 0) c = -c;
  return p * Rational(1 / c);
}

Poly monic(const Poly& p) {
  if (p.is_zero()) return p;
  return p * Rational(1 / p.leading_coefficient());
}

namespace {

Poly exact_quotient(const Poly& a, const Poly& b) {
  auto q = divide_exact(a, b);
  assert(q.has_value());
  return *q;
}

Monomial monomial_content(const Poly& p) {
  auto it = p.terms().begin();
  Monomial g = it->first;
  for (++it; it != p.terms().end() && !g.is_one(); ++it) g = g.gcd(it->first);
  return g;
}

// Pseudo-remainder of a by b as polynomials in v.
Poly pseudo_remainder(Poly a, const Poly& b, Var v) {
  const auto db = b.degree_in(v);
  const Poly lb = b.leading_coefficient_in(v);
  while (!a.is_zero()) {
    const auto da = a.degree_in(v);
    if (da < db) break;
    const Poly la = a.leading_coefficient_in(v);
    a = lb * a - la.multiply_monomial(Monomial::of(v, da - db), 1) * b;
  }
  return a;
}

Poly primitive_in(const Poly& p, Var v) {
  const Poly c = content_in(p, v);
  return integer_primitive(c.is_constant() ? p : exact_quotient(p, c));
}

// Dense univariate polynomial over Q, lowest degree first.
using Dense = std::vector<Rational>;

void trim(Dense& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Dense dense_remainder(Dense a, const Dense& b) {
  while (a.size() >= b.size() && !a.empty()) {
    const Rational q = a.back() / b.back();
    const std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= q * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

std::size_t dense_gcd_degree(Dense a, Dense b) {
  while (!b.empty()) {
    Dense r = dense_remainder(std::move(a), b);
    a = std::move(b);
    b = std::move(r);
  }
  return a.empty() ? 0 : a.size() - 1;
}

// p with every variable except v replaced by the value from `point`.
Dense specialise(const Poly& p, Var v, const std::map<Var, long>& point) {
  Dense out(p.degree_in(v) + 1);
  for (const auto& [m, c] : p.terms()) {
    Rational t = c;
    for (const auto& [u, e] : m.powers()) {
      if (u == v) continue;
      mpz_class pw;
      mpz_ui_pow_ui(pw.get_mpz_t(), static_cast<unsigned long>(std::abs(point.at(u))), e);
      if (point.at(u) < 0 && e % 2 == 1) pw = -pw;
      t *= pw;
    }
    out[m.degree_in(v)] += t;
  }
  trim(out);
  return out;
}

// True only when a and b certainly share no nonconstant factor. A common
// factor of degree k in v survives any specialisation of the other variables
// that keeps both leading coefficients in v nonzero, so univariate gcds of
// degree 0 in every shared variable prove coprimality.
bool provably_coprime(const Poly& a, const Poly& b) {
  const auto va = a.variables();
  const auto vb = b.variables();
  std::vector<Var> shared;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(shared));
  if (shared.empty()) return true;
  std::map<Var, long> point;
  long next = 2;
  for (Var u : va) point[u] = (next += 3) % 17 - 8;
  for (Var u : vb) {
    if (!point.count(u)) point[u] = (next += 3) % 17 - 8;
  }
  for (Var v : shared) {
    bool done = false;
    for (int attempt = 0; attempt < 3 && !done; ++attempt) {
      const Dense sa = specialise(a, v, point);
      const Dense sb = specialise(b, v, point);
      if (sa.size() == a.degree_in(v) + 1 && sb.size() == b.degree_in(v) + 1) {
        if (dense_gcd_degree(sa, sb) > 0) return false;
        done = true;
      } else {
        for (auto& [u, x] : point) x = x * 3 + 1 + attempt;
      }
    }
    if (!done) return false;
  }
  return true;
}


// Heuristic gcd over Z: evaluate the main variable at a large integer,
// recurse, and rebuild the candidate from its xi-adic digits. Every
// candidate is checked by exact division, so a miss only costs time.
struct HeuristicGcd {
  Poly h, cf, cg;
};

mpz_class max_norm(const Poly& p) {
  mpz_class m = 0;
  for (const auto& [mono, c] : p.terms()) {
    if (abs(c.get_num()) > m) m = abs(c.get_num());
  }
  return m;
}

mpz_class integer_content(const Poly& p) {
  mpz_class g = 0;
  for (const auto& [mono, c] : p.terms()) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num().get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

Poly scale_down(const Poly& p, const mpz_class& c) { return c == 1 ? p : p * Rational(mpq_class(1, c)); }

Poly evaluate_at(const Poly& p, Var v, const mpz_class& xi) {
  std::map<std::uint32_t, mpz_class> powers;
  Poly out;
  for (const auto& [m, c] : p.terms()) {
    const auto e = m.degree_in(v);
    auto it = powers.find(e);
    if (it == powers.end()) {
      mpz_class pw;
      mpz_pow_ui(pw.get_mpz_t(), xi.get_mpz_t(), e);
      it = powers.emplace(e, pw).first;
    }
    out += Poly::term(m.without(v), c * Rational(it->second));
  }
  return out;
}

// Symmetric xi-adic expansion of every integer coefficient into powers of v.
Poly interpolate(const Poly& h, Var v, const mpz_class& xi) {
  Poly out;
  const mpz_class half = xi / 2;
  for (const auto& [m, c] : h.terms()) {
    mpz_class n = c.get_num();
    for (std::uint32_t i = 0; n != 0; ++i) {
      mpz_class r;
      mpz_fdiv_r(r.get_mpz_t(), n.get_mpz_t(), xi.get_mpz_t());
      if (r > half) r -= xi;
      if (r != 0) out += Poly::term(i ? m * Monomial::of(v, i) : m, Rational(r));
      n = (n - r) / xi;
    }
  }
  return out;
}

bool divides_into(const Poly& f, const Poly& d, Poly& quotient) {
  if (d.is_zero()) return false;
  auto q = divide_exact(f, d);
  if (!q) return false;
  quotient = std::move(*q);
  return true;
}

std::optional<HeuristicGcd> heuristic_gcd(const Poly& f0, const Poly& g0, int depth = 0) {
  if (f0.is_constant() && g0.is_constant()) {
    mpz_class a = f0.constant_value().get_num(), b = g0.constant_value().get_num(), g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    if (g == 0) return std::nullopt;
    return HeuristicGcd{Poly(Rational(g)), Poly(Rational(a / g)), Poly(Rational(b / g))};
  }
  const mpz_class cf = integer_content(f0), cg = integer_content(g0);
  mpz_class common;
  mpz_gcd(common.get_mpz_t(), cf.get_mpz_t(), cg.get_mpz_t());
  const Poly f = scale_down(f0, common), g = scale_down(g0, common);
  auto vars = f.variables();
  const auto vg = g.variables();
  vars.insert(vars.end(), vg.begin(), vg.end());
  const Var v = *std::min_element(vars.begin(), vars.end());

  const mpz_class fn = max_norm(f), gn = max_norm(g);
  const mpz_class bound = 2 * std::min(fn, gn) + 29;
  mpz_class xi = std::min(bound, mpz_class(99 * sqrt(bound)));
  const auto lead_ratio = [](const Poly& p, const mpz_class& norm) {
    return mpz_class(norm / abs(p.leading_coefficient().get_num()));
  };
  xi = std::max(xi, mpz_class(2 * std::min(lead_ratio(f, fn), lead_ratio(g, gn)) + 2));
  for (int attempt = 0; attempt < 6; ++attempt) {
    const Poly ff = evaluate_at(f, v, xi);
    const Poly gg = evaluate_at(g, v, xi);
    if (!ff.is_zero() && !gg.is_zero()) {
      const auto sub = heuristic_gcd(ff, gg, depth + 1);
      if (!sub) return std::nullopt;
      Poly h = interpolate(sub->h, v, xi);
      if (!h.is_zero()) {
        h = scale_down(h, integer_content(h));
        Poly qf, qg;
        if (divides_into(f, h, qf) && divides_into(g, h, qg)) {
          return HeuristicGcd{h * Rational(common), qf, qg};
        }
      }
      const Poly cff = interpolate(sub->cf, v, xi);
      if (divides_into(f, cff, h)) {
        Poly qg;
        if (divides_into(g, h, qg)) return HeuristicGcd{h * Rational(common), cff, qg};
      }
      const Poly cfg = interpolate(sub->cg, v, xi);
      if (divides_into(g, cfg, h)) {
        Poly qf;
        if (divides_into(f, h, qf)) return HeuristicGcd{h * Rational(common), qf, cfg};
      }
    }
    xi = 73794 * xi * mpz_class(sqrt(mpz_class(sqrt(xi)))) / 27011;
  }
  return std::nullopt;
}

}  // namespace

Poly content_in(const Poly& p, Var v) {
  if (p.is_zero()) return p;
  Poly g;
  for (const auto& [e, coeff] : p.coefficients_in(v)) {
    g = gcd(g, coeff);
    if (g.is_constant()) return Poly(1);
  }
  return g;
}

Poly gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  if (a.is_constant() || b.is_constant()) return Poly(1);
  if (a == b) return monic(a);
  if (a.size() == 1 || b.size() == 1) {
    const Monomial g = monomial_content(a).gcd(monomial_content(b));
    return Poly::term(g, 1);
  }
  if (provably_coprime(a, b)) return Poly(1);
  // Cheap exact-divisibility shortcut.
  if (a.total_degree() <= b.total_degree()) {
    if (divide_exact(b, a)) return monic(a);
  } else if (divide_exact(a, b)) {
    return monic(b);
  }
  if (auto h = heuristic_gcd(integer_primitive(a), integer_primitive(b))) return monic(h->h);
  const auto va = a.variables();
  const auto vb = b.variables();
  const Var v = std::min(va.front(), vb.front());
  const bool in_a = va.front() == v;
  const bool in_b = vb.front() == v;
  if (!in_a) return gcd(a, content_in(b, v));
  if (!in_b) return gcd(content_in(a, v), b);

  const Poly ca = content_in(a, v);
  const Poly cb = content_in(b, v);
  const Poly c = gcd(ca, cb);
  Poly pa = ca.is_constant() ? a : exact_quotient(a, ca);
  Poly pb = cb.is_constant() ? b : exact_quotient(b, cb);
  if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
  while (!pb.is_zero()) {
    Poly r = pseudo_remainder(pa, pb, v);
    pa = std::move(pb);
    if (r.is_zero()) break;
    if (r.degree_in(v) == 0) {
      pa = Poly(1);
      break;
    }
    pb = primitive_in(r, v);
  }
  Poly g = pa.is_constant() ? Poly(1) : primitive_in(pa, v);
  return monic(c * g);
}

}  // namespace pfaffian
