#include <gtest/gtest.h>

#include <cmath>

#include "pfaffian/error.hpp"
#include "pfaffian/flag.hpp"
#include "pfaffian/numeric.hpp"
#include "test_support.hpp"

using namespace pfaffian;
using testing_support::ExprGenerator;
using testing_support::load_system;

namespace {

Expr E(const ControlAffineSystem& sys, const std::string& s) { return parse_expr(s, sys.symbols); }

ControlSchedule constant(std::vector<double> u, double horizon) {
  ControlSchedule s;
  s.pieces.push_back({horizon, std::move(u)});
  return s;
}

Assignment point(const ControlAffineSystem& sys, std::vector<double> values) {
  Assignment p;
  for (SymbolId s = 0; s < values.size(); ++s) p[s] = values[s];
  (void)sys;
  return p;
}

VectorField field(const ControlAffineSystem& sys, const std::vector<std::string>& c) {
  VectorField v;
  for (const auto& s : c) v.push_back(E(sys, s));
  return v;
}

bool is_zero_field(const VectorField& v) {
  for (const auto& e : v) {
    if (!e.is_zero()) return false;
  }
  return true;
}

}  // namespace

TEST(Simulate, Example1StaysOnPlane) {
  const auto sys = load_system("ex1");
  const auto tr = simulate(sys, sys.domain(), point(sys, {0, 0, 0}), constant({1, 0}, 1.0), 1e-3, {E(sys, "z")});
  EXPECT_EQ(tr.t.size(), 1001u);
  for (const auto& x : tr.x) EXPECT_EQ(x[2], 0.0);
  EXPECT_NEAR(tr.x.back()[0], 1.0, 1e-12);
}

TEST(Simulate, ZeroHorizonIsASingleSample) {
  const auto sys = load_system("ex2");
  const auto tr = simulate(sys, sys.domain(), point(sys, {1, 2, 3}), ControlSchedule{}, 1e-3);
  ASSERT_EQ(tr.t.size(), 1u);
  EXPECT_EQ(tr.x[0], (std::vector<double>{1, 2, 3}));
}

TEST(Simulate, Example3ExactSolution) {
  const auto sys = load_system("ex3");
  // a = b = 1, w0 = 0, u = (1, 0): x = t, y = 0, z = t.
  const auto tr = simulate(sys, sys.domain(), point(sys, {0, 0, 0, 0, 1, 1}), constant({1, 0}, 2.0), 1e-3,
                           {E(sys, "b*x - a*z")});
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    EXPECT_NEAR(tr.x[i][0], tr.t[i], 1e-10);
    EXPECT_NEAR(tr.x[i][2], tr.t[i], 1e-10);
    EXPECT_LT(std::abs(tr.rho[i][0]), 1e-10);
  }
}

TEST(Simulate, PieceBoundariesSnapToTheGrid) {
  const auto sys = load_system("ex1");
  ControlSchedule s;
  s.pieces.push_back({0.3333, {1, 0}});
  s.pieces.push_back({0.6667, {0, 1}});
  const auto tr = simulate(sys, sys.domain(), point(sys, {0, 0, 0}), s, 0.01);
  EXPECT_EQ(tr.t.size(), 101u);
  EXPECT_EQ(tr.u[32], (std::vector<double>{1, 0}));
  EXPECT_EQ(tr.u[33], (std::vector<double>{0, 1}));
}

TEST(Simulate, Rk4ConvergesWithFourthOrder) {
  const auto sys = load_system("ex3");
  const auto x0 = point(sys, {0.1, -0.2, 0.3, 0.4, 1.3, 0.7});
  const auto sched = constant({1, 0.8}, 4.0);
  const auto ref = simulate(sys, sys.domain(), x0, sched, 1e-4).x.back();
  auto error = [&](double h) {
    const auto x = simulate(sys, sys.domain(), x0, sched, h).x.back();
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) e = std::max(e, std::abs(x[i] - ref[i]));
    return e;
  };
  const double ratio = error(0.2) / error(0.1);
  EXPECT_GE(ratio, 10.0);
  EXPECT_LE(ratio, 25.0);
}

TEST(Simulate, SingularFieldAndDomainExit) {
  const auto singular = parse_system("states: x y\ncontrol g1: [1/y, 0]\n");
  try {
    (void)simulate(singular, singular.domain(), point(singular, {0, 0}), constant({1}, 1), 1e-2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StepSingular);
  }
  const auto bounded = parse_system("states: x y\ncontrol g1: [1, 0]\nassume_nonzero: x - 1\n");
  try {
    (void)simulate(bounded, bounded.domain(), point(bounded, {0, 0}), constant({1}, 2), 1e-2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainExit);
  }
  const auto partial = simulate_until(bounded, bounded.domain(), point(bounded, {0, 0}), constant({1}, 2), 1e-2, {});
  ASSERT_TRUE(partial.stopped.has_value());
  EXPECT_NEAR(partial.t.back(), 1.0, 0.02);
}

TEST(Simulate, CsvHeader) {
  const auto sys = load_system("ex1");
  const auto tr = simulate(sys, sys.domain(), point(sys, {0, 0, 0}), constant({1, 0}, 0.01), 1e-2, {E(sys, "z")});
  const auto csv = tr.to_csv(sys);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x,y,z,u1,u2,rho1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Invariance, Example1Holds) {
  const auto sys = load_system("ex1");
  const auto v = invariance_test(sys, sys.domain(), {E(sys, "z")}, 20, 10, 5.0, 1e-3, 42);
  EXPECT_EQ(v.verdict, InvarianceStatus::Held);
  EXPECT_EQ(v.trials.size(), 20u);
}

TEST(Invariance, Example2IsViolated) {
  const auto sys = load_system("ex2");
  const auto v = invariance_test(sys, sys.domain(), {E(sys, "y")}, 20, 10, 5.0, 1e-3, 42);
  EXPECT_EQ(v.verdict, InvarianceStatus::Violated);
}

TEST(Invariance, Example3LevelSets) {
  const auto sys = load_system("ex3");
  Rng rng(8);
  for (int k = 0; k < 3; ++k) {
    const Expr c(Rational(static_cast<long>(rng.integer(-20, 20)), 7));
    const auto v = invariance_test(sys, sys.domain(), {E(sys, "b*x - a*z") - c}, 10, 10, 5.0, 1e-3, 42 + k);
    EXPECT_EQ(v.verdict, InvarianceStatus::Held);
  }
}

TEST(Invariance, DeterministicForASeed) {
  const auto sys = load_system("ex2");
  const auto a = invariance_test(sys, sys.domain(), {E(sys, "y")}, 5, 3, 1.0, 1e-2, 7);
  const auto b = invariance_test(sys, sys.domain(), {E(sys, "y")}, 5, 3, 1.0, 1e-2, 7);
  for (std::size_t i = 0; i < a.trials.size(); ++i) EXPECT_EQ(a.trials[i].max_abs, b.trials[i].max_abs);
}

TEST(Escape, Example2LeavesThePlane) {
  const auto sys = load_system("ex2");
  const auto e = escape_test(sys, sys.domain(), {E(sys, "y")}, 42);
  ASSERT_TRUE(e.has_value());
  EXPECT_GT(std::abs(e->value), kEscapeThreshold);
  EXPECT_LE(e->time, kEscapeHorizon);
  // Oracle: at y = 0 the y-velocity is u2, so the escaping control has u2 != 0.
  EXPECT_NE(e->schedule.pieces[0].value[1], 0.0);
}

TEST(Escape, InvariantSetsHaveNone) {
  const auto sys = load_system("ex1");
  EXPECT_FALSE(escape_test(sys, sys.domain(), {E(sys, "z")}, 42).has_value());
  const auto flat = parse_system("states: x y z\ncontrol g1: [1, 0, 0]\ncontrol g2: [0, 1, 0]\n");
  EXPECT_FALSE(escape_test(flat, flat.domain(), {E(flat, "z")}, 42).has_value());
}

TEST(LieBracket, Examples) {
  const auto sys = load_system("ex3");
  EXPECT_EQ(lie_bracket(sys.controls[0], sys.controls[1]), field(sys, {"a*sin(w)", "-cos(w)", "b*sin(w)", "0"}));
  EXPECT_TRUE(is_zero_field(lie_bracket(sys.controls[0], sys.controls[0])));
  const auto plane = parse_system("states: x y\ncontrol g: [1, 0]\n");
  EXPECT_EQ(lie_bracket(field(plane, {"1", "0"}), field(plane, {"0", "x"})), field(plane, {"0", "1"}));
}

TEST(LieBracket, AntisymmetryAndJacobi) {
  static const SymbolTable t({"x", "y", "z"}, {});
  ExprGenerator gen(t, 3, 17);
  auto random_field = [&] {
    VectorField v;
    for (int i = 0; i < 3; ++i) v.push_back(gen.polynomial(true));
    return v;
  };
  for (int i = 0; i < 100; ++i) {
    const auto X = random_field(), Y = random_field(), Z = random_field();
    const auto xy = lie_bracket(X, Y), yx = lie_bracket(Y, X);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE((xy[k] + yx[k]).is_zero());
    const auto a = lie_bracket(xy, Z), b = lie_bracket(lie_bracket(Y, Z), X), c = lie_bracket(lie_bracket(Z, X), Y);
    for (int k = 0; k < 3; ++k) EXPECT_TRUE((a[k] + b[k] + c[k]).is_zero());
  }
}

TEST(BracketRank, Examples) {
  const auto ex3 = load_system("ex3");
  Rng rng(4);
  const auto p3 = generic_point(ex3.domain(), rng);
  const auto r3 = bracket_rank(ex3.controls, ex3.control_names, p3, 2);
  EXPECT_EQ(r3.rank, 3u);
  const auto leaf3 = leaf_controllability(ex3, {E(ex3, "b*x - a*z")}, p3, 2);
  EXPECT_EQ(leaf3.leaf_dimension, 3u);
  EXPECT_TRUE(leaf3.controllable);

  const auto ex1 = load_system("ex1");
  const auto p1 = point(ex1, {0.7, -1.3, 0});
  const auto leaf1 = leaf_controllability(ex1, {E(ex1, "z")}, p1, 1);
  EXPECT_EQ(leaf1.rank, 2u);
  EXPECT_TRUE(leaf1.tangent);
  EXPECT_TRUE(leaf1.controllable);

  const auto single = parse_system("states: x y\ncontrol g: [1, x]\n");
  EXPECT_EQ(bracket_rank({single.controls[0]}, {"g"}, point(single, {0.3, 0.1}), 4).rank, 1u);
  try {
    (void)bracket_rank(single.controls, {"g"}, point(single, {0, 0}), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(BracketRank, OffLeafFieldsAreNotTangent) {
  const auto ex2 = load_system("ex2");
  const auto leaf = leaf_controllability(ex2, {E(ex2, "y")}, point(ex2, {0.5, 0, 0.2}), 2);
  EXPECT_FALSE(leaf.tangent);
  EXPECT_FALSE(leaf.controllable);
}

TEST(Duality, NumericTypeMatchesTheFlag) {
  for (const char* stem : {"ex1", "ex2", "ex3", "ex4", "ex4_ydrift", "ex4_spanned"}) {
    const auto sys = load_system(stem);
    const auto flag = derived_flag(sys, 42);
    Rng rng(12);
    const auto p = generic_point(flag.domain, rng);
    EXPECT_EQ(numeric_distribution_type(sys, p), flag.distribution_type(sys.n())) << stem;
  }
}
