// One pass/fail line per acceptance criterion; exit status 0 iff all pass.

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "cli.hpp"
#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"
#include "pfaffian/report.hpp"
#include "test_support.hpp"

using namespace pfaffian;
using testing_support::ExprGenerator;
using testing_support::load_system;
using testing_support::proportional;
using testing_support::random_form;
using testing_support::same_span;

namespace {

const char* const kBundled[] = {"ex1", "ex2", "ex3", "ex4", "ex4_ydrift", "ex4_spanned"};

// Collects failed checks of one criterion.
struct Checks {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

Expr E(const ControlAffineSystem& sys, const std::string& s) { return parse_expr(s, sys.symbols); }

DifferentialForm one_form(const ControlAffineSystem& sys, const std::vector<std::string>& coeffs) {
  std::vector<Expr> c;
  for (const auto& s : coeffs) c.push_back(E(sys, s));
  return DifferentialForm::one_form(c);
}

// a = r * b for a nonzero rational r.
bool rational_multiple(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return false;
  return (a / b).is_constant();
}

const InvariantSet* find_set(const std::vector<InvariantSet>& sets, const Expr& rho) {
  for (const auto& s : sets) {
    if (s.candidate.rho.size() == 1 && rational_multiple(s.candidate.rho[0], rho)) return &s;
  }
  return nullptr;
}

const RejectedCandidate* find_rejected(const std::vector<RejectedCandidate>& list, const Expr& rho) {
  for (const auto& r : list) {
    if (r.candidate.rho.size() == 1 && rational_multiple(r.candidate.rho[0], rho)) return &r;
  }
  return nullptr;
}

bool contains(const std::vector<Expr>& list, const Expr& e) {
  for (const auto& x : list) {
    if (rational_multiple(x, e)) return true;
  }
  return false;
}

// Every trial within 1e-6 (1 + arc length), without early stops.
bool held_strictly(const InvarianceVerdict& v, std::size_t trials) {
  if (v.verdict != InvarianceStatus::Held || v.trials.size() != trials || v.stopped_trials != 0) return false;
  for (const auto& t : v.trials) {
    if (!(t.max_abs < kInvarianceScale * (1.0 + t.arc_length))) return false;
  }
  return true;
}

AnalysisConfig acceptance_config() {
  AnalysisConfig c;  // seed 42, 100 trials, 10 pieces, horizon 5, h = 1e-3, 5 levels
  return c;
}

// ------------------------------------------------------------ criteria

Checks example1(const InvariantReport& r) {
  Checks c;
  const auto& sys = r.system;
  c.require(r.flag.has_value(), "derived flag computed");
  if (!r.flag) return c;
  const auto& level0 = r.flag->levels.front();
  c.require(same_span(level0.system.generators, {one_form(sys, {"x*y*z", "-x*z", "1"})}),
            "annihilator spans xyz dx - xz dy + dz");
  c.require(level0.torsion.entries.size() == 1 && level0.torsion.entries[0].size() == 1 &&
                rational_multiple(level0.torsion.entries[0][0], E(sys, "-z*(1 + x)")),
            "torsion -z(1+x) up to unit");
  c.require(contains(r.gfi_candidates, E(sys, "z")), "candidate set contains z");
  const auto* iso = find_set(r.isolated, E(sys, "z"));
  c.require(iso != nullptr && r.isolated.size() == 1, "z is the single isolated invariant set");
  if (iso) {
    c.require(iso->candidate.classification == Classification::GeneralizedFirstIntegral, "z classified GFI");
    // dz = theta - z (xy dx - x dy): the reduction of dz mod theta is -z (xy dx - x dy).
    const auto theta = one_form(sys, {"x*y*z", "-x*z", "1"});
    const auto cert = Expr(-1) * E(sys, "z") * one_form(sys, {"x*y", "-x", "0"});
    c.require(d(DifferentialForm::scalar(3, E(sys, "z"))) == theta + cert, "certificate identity dz = theta + rest");
    c.require(!iso->candidate.membership.empty() && iso->candidate.membership[0].reduced == cert,
              "membership reduction equals -z(xy dx - x dy)");
    c.require(iso->controllability && iso->controllability->rank == 2 && iso->controllability->leaf_dimension == 2 &&
                  iso->controllability->controllable,
              "on-leaf bracket rank 2 = leaf dimension");
    c.require(iso->invariance.size() == 1 && held_strictly(iso->invariance[0].second, 100),
              "100 trials keep |z| < 1e-6 (1 + arc length)");
  }
  c.require(r.conclusion().rfind("1 isolated invariant submanifold: {z = 0}", 0) == 0,
            "conclusion names the isolated submanifold {z = 0}");
  return c;
}

Checks example2(const InvariantReport& r) {
  Checks c;
  const auto& sys = r.system;
  c.require(r.flag.has_value(), "derived flag computed");
  if (!r.flag) return c;
  const auto& T = r.flag->levels.front().torsion;
  c.require(T.entries.size() == 1 && T.entries[0].size() == 1 &&
                rational_multiple(T.entries[0][0], E(sys, "-y*(1 + 2*x)")),
            "torsion -y(1+2x) up to unit");
  const auto* y = find_rejected(r.rejected, E(sys, "y"));
  const auto* x = find_rejected(r.rejected, E(sys, "1 + 2*x"));
  c.require(y != nullptr, "y rejected");
  c.require(x != nullptr, "1+2x rejected");
  c.require(r.isolated.empty() && r.foliation.empty(), "no invariant sets");
  if (y) {
    c.require(y->candidate.failing_coefficient && *y->candidate.failing_coefficient == Expr(1),
              "y leaves irreducible coefficient 1");
    c.require(y->escape && std::abs(y->escape->value) > kEscapeThreshold && y->escape->time <= kEscapeHorizon,
              "escape schedule drives |y| > 0.1 within horizon 5");
  }
  c.require(r.conclusion() == "no invariant submanifolds", "conclusion: no invariant submanifolds");
  return c;
}

Checks example3(const InvariantReport& r) {
  Checks c;
  const auto& sys = r.system;
  c.require(r.flag && r.flag->nu == 1 && r.flag->q == 1, "flag type (1, 1)");
  if (!r.flag) return c;
  c.require(r.flag->levels.size() == 2 && same_span(r.flag->levels[1].system.generators, {one_form(sys, {"b", "0", "-a", "0"})}),
            "I(1) spanned by b dx - a dz");
  const Expr rho = E(sys, "b*x - a*z");
  const auto* leaf = find_set(r.foliation, rho);
  c.require(leaf != nullptr && r.foliation.size() == 1, "first integral bx - az up to rational unit");
  c.require(lie_bracket(sys.controls[0], sys.controls[1]) ==
                VectorField{E(sys, "a*sin(w)"), E(sys, "-cos(w)"), E(sys, "b*sin(w)"), Expr(0)},
            "[g1, g2] = (a sin w, -cos w, b sin w, 0)");
  Rng rng(derive_seed(42, 3));
  bool controllable = true;
  for (int i = 0; i < 5; ++i) {
    const auto p = generic_point(r.flag->domain, rng);
    const auto lc = leaf_controllability(sys, {rho - Expr(Rational(evaluate(rho, p)))}, p);
    controllable = controllable && lc.rank == 3 && lc.controllable;
  }
  c.require(controllable, "bracket rank 3 at 5 generic leaf points");
  if (leaf) {
    c.require(leaf->controllability && leaf->controllability->controllable, "report marks leaves controllable");
    bool held = leaf->invariance.size() == 5;
    for (const auto& [level, v] : leaf->invariance) held = held && held_strictly(v, 100);
    c.require(held, "bx - az - c invariant for 5 random c, 100 trials each");
  }
  return c;
}

Checks example4(const InvariantReport& ex4, const InvariantReport& ydrift, const InvariantReport& spanned,
                const InvariantReport& driftless) {
  Checks c;
  const auto& sys = ex4.system;
  const Expr rho = E(sys, "b*x - a*z");
  if (ex4.flag) {
    // Frozen output of tests/oracles/ex4_torsion.py (columns dy^dz, dy^dw, dz^dw).
    const auto& T = ex4.flag->levels.front().torsion;
    c.require(T.entries.size() == 1 &&
                  proportional(T.entries[0], {Expr(0), Expr(0), E(sys, "(b*x - a*z)/cos(w)")}),
              "torsion matches the independent expansion");
  }
  const auto* gfi = find_set(ex4.isolated, rho);
  c.require(gfi != nullptr, "bx - az is an isolated invariant set");
  if (gfi) {
    c.require(gfi->candidate.classification == Classification::GeneralizedFirstIntegral, "classified GFI");
    bool polynomial = !gfi->candidate.field_certificates.empty();
    for (const auto& q : gfi->candidate.field_certificates) polynomial = polynomial && q && q->is_polynomial();
    c.require(polynomial, "polynomial certificates X rho / rho");
  }
  const auto* fi = find_set(ydrift.foliation, E(ydrift.system, "b*x - a*z"));
  c.require(fi != nullptr && fi->candidate.classification == Classification::FirstIntegral,
            "drift along y: bx - az is a first integral");
  auto sets = [](const InvariantReport& r) {
    const auto j = to_json(r);
    std::vector<std::string> out;
    for (const char* key : {"foliation", "isolated"}) {
      for (const auto& s : j[key]) {
        out.push_back(std::string(key) + ":" + s["rho"].dump() + ":" + s["classification"].get<std::string>() + ":" +
                      s["leaf_dimension"].dump());
      }
    }
    out.push_back(j["conclusion"].get<std::string>());
    return out;
  };
  c.require(sets(spanned) == sets(driftless), "drift g1 + g2: invariant sets match the driftless run");
  return c;
}

Checks properties() {
  Checks c;
  static const SymbolTable t({"x", "y", "z", "w"}, {{"a", ParamSign::Positive}, {"b", ParamSign::Positive}});
  auto proven_zero = [](const DifferentialForm& f, std::uint64_t seed) {
    for (const auto& [idx, coeff] : f.terms()) {
      if (is_zero(coeff, seed).status != ZeroStatus::ProvenZero) return false;
    }
    return true;
  };
  {
    ExprGenerator gen(t, 4, 501);
    Rng rng(502);
    int dd = 0, graded = 0, leibniz = 0;
    for (int i = 0; i < 200; ++i) {
      const auto f = random_form(gen, 4, static_cast<std::size_t>(i % 4), rng);
      dd += proven_zero(d(d(f)), i);
    }
    for (int i = 0; i < 200; ++i) {
      const std::size_t p = static_cast<std::size_t>(i % 3), q = static_cast<std::size_t>((i / 3) % 3);
      const auto a = random_form(gen, 4, p, rng), b = random_form(gen, 4, q, rng);
      const auto ba = wedge(b, a);
      graded += proven_zero(wedge(a, b) - ((p * q) % 2 ? -ba : ba), i);
    }
    for (int i = 0; i < 200; ++i) {
      const std::size_t p = static_cast<std::size_t>(i % 3), q = static_cast<std::size_t>((i / 3) % 2);
      const auto a = random_form(gen, 4, p, rng), b = random_form(gen, 4, q, rng);
      const auto rhs = wedge(d(a), b) + (p % 2 ? -wedge(a, d(b)) : wedge(a, d(b)));
      leibniz += proven_zero(d(wedge(a, b)) - rhs, i);
    }
    c.require(dd == 200, "d(d f) = 0 on 200 forms (" + std::to_string(dd) + ")");
    c.require(graded == 200, "graded commutativity on 200 pairs (" + std::to_string(graded) + ")");
    c.require(leibniz == 200, "Leibniz rule on 200 pairs (" + std::to_string(leibniz) + ")");
  }
  {
    static const SymbolTable t3({"x", "y", "z"}, {});
    ExprGenerator gen(t3, 3, 503);
    auto field = [&] {
      VectorField v;
      for (int i = 0; i < 3; ++i) v.push_back(gen.polynomial(true));
      return v;
    };
    int ok = 0;
    for (int i = 0; i < 100; ++i) {
      const auto X = field(), Y = field(), Z = field();
      bool good = true;
      const auto xy = lie_bracket(X, Y), yx = lie_bracket(Y, X);
      const auto a = lie_bracket(xy, Z), b = lie_bracket(lie_bracket(Y, Z), X), cc = lie_bracket(lie_bracket(Z, X), Y);
      for (int k = 0; k < 3; ++k) {
        good = good && is_zero(xy[k] + yx[k], i).status == ZeroStatus::ProvenZero &&
               is_zero(a[k] + b[k] + cc[k], i).status == ZeroStatus::ProvenZero;
      }
      ok += good;
    }
    c.require(ok == 100, "bracket antisymmetry and Jacobi on 100 triples (" + std::to_string(ok) + ")");
  }
  {
    const auto sys = load_system("ex3");
    Assignment x0;
    const double v[] = {0.1, -0.2, 0.3, 0.4, 1.3, 0.7};
    for (SymbolId s = 0; s < 6; ++s) x0[s] = v[s];
    ControlSchedule sched;
    sched.pieces.push_back({4.0, {1.0, 0.8}});
    const auto ref = simulate(sys, sys.domain(), x0, sched, 1e-4).x.back();
    auto error = [&](double h) {
      const auto x = simulate(sys, sys.domain(), x0, sched, h).x.back();
      double e = 0;
      for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - ref[i]));
      return e;
    };
    const double ratio = error(0.2) / error(0.1);
    c.require(ratio >= 10 && ratio <= 25, "RK4 error ratio " + std::to_string(ratio) + " in [10, 25]");
  }
  {
    ExprGenerator gen(t, 4, 504);
    Rng rng(505);
    int checked = 0, agreed = 0;
    while (checked < 200) {
      const Expr e = gen.expression();
      const auto v = static_cast<SymbolId>(checked % 4);
      Assignment p;
      for (SymbolId s = 0; s < t.size(); ++s) p[s] = rng.uniform(-1.5, 1.5);
      const double h = 1e-5;
      try {
        Assignment plus = p, minus = p;
        plus[v] += h;
        minus[v] -= h;
        const double fd = (evaluate(e, plus) - evaluate(e, minus)) / (2 * h);
        const double exact = evaluate(differentiate(e, v), p);
        ++checked;
        agreed += std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact));
      } catch (const Error&) {
        // singular point: redraw
      }
    }
    c.require(agreed == 200, "finite differences match derivatives on 200 pairs (" + std::to_string(agreed) + ")");
  }
  for (const char* stem : kBundled) {
    const auto sys = load_system(stem);
    const auto flag = derived_flag(sys, 42);
    Rng rng(derive_seed(42, 9));
    c.require(numeric_distribution_type(sys, generic_point(flag.domain, rng)) == flag.distribution_type(sys.n()),
              std::string("flag duality on ") + stem);
  }
  return c;
}

Checks determinism() {
  Checks c;
  for (const char* stem : kBundled) {
    const std::string path = std::string(PFAFFIAN_SYSTEMS_DIR) + "/" + stem + ".sys";
    std::string outputs[2];
    for (auto& output : outputs) {
      std::istringstream in;
      std::ostringstream out, err;
      const int code = cli::run({"analyze", path, "--seed", "42"}, in, out, err);
      c.require(code == 0, std::string(stem) + ": analyze exit code " + std::to_string(code));
      output = out.str();
    }
    c.require(!outputs[0].empty() && outputs[0] == outputs[1], std::string(stem) + ": byte-identical JSON");
  }
  return c;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Checks()>& run) {
    Checks c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    std::printf("criterion %d (%s): %s\n", id, name, c.failures.empty() ? "PASS" : "FAIL");
    for (const auto& f : c.failures) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
    failed += !c.failures.empty();
  };
  const auto config = acceptance_config();
  const auto ex1 = analyze(load_system("ex1"), config);
  const auto ex2 = analyze(load_system("ex2"), config);
  const auto ex3 = analyze(load_system("ex3"), config);
  report(1, "Example 1 end-to-end", [&] { return example1(ex1); });
  report(2, "Example 2 negative result", [&] { return example2(ex2); });
  report(3, "Example 3 foliation", [&] { return example3(ex3); });
  report(4, "Example 4 generalized first integral", [&] {
    return example4(analyze(load_system("ex4"), config), analyze(load_system("ex4_ydrift"), config),
                    analyze(load_system("ex4_spanned"), config), ex3);
  });
  report(5, "property suites", properties);
  report(6, "determinism", determinism);
  return failed == 0 ? 0 : 1;
}
