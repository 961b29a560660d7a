#include <gtest/gtest.h>

#include <algorithm>

#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"
#include "pfaffian/integrals.hpp"
#include "test_support.hpp"

using namespace pfaffian;
using testing_support::ExprGenerator;
using testing_support::load_system;
using testing_support::proportional;

namespace {

struct Prepared {
  ControlAffineSystem sys;
  Domain domain;
  PfaffianSystem theta;
  TorsionMatrix torsion;
};

Prepared prepare(const ControlAffineSystem& sys) {
  Prepared p{sys, sys.domain(), {}, {}};
  p.theta = annihilator(sys, p.domain, 1);
  complete_coframe(p.theta, p.domain, 2);
  p.torsion = torsion(p.theta, p.domain, 3);
  return p;
}

Expr E(const ControlAffineSystem& sys, const std::string& s) { return parse_expr(s, sys.symbols); }

bool same_up_to_unit(const Expr& a, const Expr& b) { return proportional({a}, {b}) && !(a / b).symbols().size(); }

// Candidate sets equal up to units and order.
bool same_set(const std::vector<Expr>& got, const std::vector<Expr>& want) {
  if (got.size() != want.size()) return false;
  for (const auto& w : want) {
    if (std::none_of(got.begin(), got.end(), [&](const Expr& g) { return same_up_to_unit(g, w); })) return false;
  }
  return true;
}

}  // namespace

TEST(PoincareIntegrate, Examples) {
  const auto sys = load_system("ex3");
  const auto w = [&](std::vector<std::string> c) {
    std::vector<Expr> v;
    for (const auto& s : c) v.push_back(E(sys, s));
    return DifferentialForm::one_form(v);
  };
  EXPECT_EQ(*poincare_integrate(w({"b", "0", "-a", "0"})), E(sys, "b*x - a*z"));
  EXPECT_EQ(*poincare_integrate(w({"0", "0", "1", "0"})), E(sys, "z"));
  EXPECT_EQ(*poincare_integrate(w({"y", "x", "0", "0"})), E(sys, "x*y"));
  EXPECT_EQ(*poincare_integrate(w({"0", "0", "0", "sin(w)"})), E(sys, "1 - cos(w)"));
  EXPECT_FALSE(poincare_integrate(w({"1/x", "0", "0", "0"})).has_value());
  try {
    (void)poincare_integrate(w({"y", "0", "0", "0"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotClosed);
  }
}

TEST(PoincareIntegrate, RoundTripOnExactForms) {
  static const SymbolTable t({"x", "y", "z", "w"}, {{"a", ParamSign::Positive}});
  ExprGenerator gen(t, 4, 91);
  for (int i = 0; i < 100; ++i) {
    // Polynomial-trig potentials: every antiderivative stays in the class.
    const Expr f = gen.polynomial(true) * gen.polynomial(true);
    const auto omega = d(DifferentialForm::scalar(4, f));
    const auto rho = poincare_integrate(omega);
    ASSERT_TRUE(rho.has_value()) << f.to_string(t);
    EXPECT_EQ(d(DifferentialForm::scalar(4, *rho)), omega) << f.to_string(t);
    for (SymbolId s : (*rho - f).symbols()) EXPECT_FALSE(t.is_state(s));
  }
}

TEST(FirstIntegrals, Example3GivesTheHyperplanes) {
  const auto sys = load_system("ex3");
  const auto flag = derived_flag(sys, 42);
  const auto found = first_integrals(flag, sys);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].classification, Classification::FirstIntegral);
  ASSERT_EQ(found[0].rho.size(), 1u);
  EXPECT_TRUE(same_up_to_unit(found[0].rho[0], E(sys, "b*x - a*z")));
}

TEST(FirstIntegrals, Example1HasNone) {
  const auto sys = load_system("ex1");
  EXPECT_TRUE(first_integrals(derived_flag(sys, 42), sys).empty());
}

TEST(FirstIntegrals, CoordinatePlaneFoliation) {
  const auto sys = parse_system("states: x y z\ncontrol g1: [1, 0, 0]\ncontrol g2: [0, 1, 0]\n");
  const auto found = first_integrals(derived_flag(sys, 42), sys);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].rho[0], E(sys, "z"));
}

TEST(FirstIntegrals, EveryIntegralIsAnnihilated) {
  for (const char* stem : {"ex3", "ex4_ydrift", "ex4_spanned"}) {
    const auto sys = load_system(stem);
    for (const auto& c : first_integrals(derived_flag(sys, 42), sys)) {
      ASSERT_EQ(c.classification, Classification::FirstIntegral) << stem;
      const auto drho = d(DifferentialForm::scalar(sys.n(), c.rho[0]));
      for (const auto& X : sys.fields()) EXPECT_TRUE(contract(drho, X).is_zero()) << stem;
    }
  }
}

TEST(GfiCandidates, BundledExamples) {
  const auto p1 = prepare(load_system("ex1"));
  EXPECT_TRUE(same_set(gfi_candidates(p1.torsion, 1, 3, p1.domain, 3, 5), {E(p1.sys, "z"), E(p1.sys, "1 + x")}));
  const auto p2 = prepare(load_system("ex2"));
  EXPECT_TRUE(same_set(gfi_candidates(p2.torsion, 1, 3, p2.domain, 3, 5), {E(p2.sys, "y"), E(p2.sys, "1 + 2*x")}));
  const auto p4 = prepare(load_system("ex4"));
  EXPECT_TRUE(same_set(gfi_candidates(p4.torsion, 1, 3, p4.domain, 4, 5), {E(p4.sys, "b*x - a*z")}));
}

TEST(GfiCandidates, Example3HasOnlyUnitMinors) {
  // Torsion (0, 1/cos w): the only nonzero minor is a unit on the domain.
  const auto p3 = prepare(load_system("ex3"));
  EXPECT_TRUE(gfi_candidates(p3.torsion, 2, 3, p3.domain, 4, 5).empty());
}

TEST(GfiCandidates, ZeroTorsion) {
  const auto p = prepare(parse_system("states: x y z\ncontrol g1: [1, 0, 0]\ncontrol g2: [0, 1, 0]\n"));
  EXPECT_TRUE(gfi_candidates(p.torsion, 1, 3, p.domain, 3, 5).empty());
}

TEST(GfiCandidates, VanishingDenominatorIsNotPolynomial) {
  const auto sys = load_system("ex1");
  TorsionMatrix T;
  T.entries = {{E(sys, "z/(x - y)")}};
  try {
    (void)gfi_candidates(T, 1, 3, sys.domain(), 3, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPolynomial);
  }
}

TEST(Membership, Example1Certificate) {
  const auto p = prepare(load_system("ex1"));
  const auto c = check_membership({E(p.sys, "z")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(c.classification, Classification::GeneralizedFirstIntegral);
  // dz = theta - z (xy dx - x dy): quotients -xy on dx and x on dy.
  ASSERT_EQ(c.membership.size(), 1u);
  EXPECT_EQ(c.membership[0].coordinates, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(c.membership[0].quotients[0][0], E(p.sys, "-x*y"));
  EXPECT_EQ(c.membership[0].quotients[1][0], E(p.sys, "x"));
  const auto other = check_membership({E(p.sys, "1 + x")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(other.classification, Classification::Rejected);
}

TEST(Membership, Example2Rejections) {
  const auto p = prepare(load_system("ex2"));
  const auto y = check_membership({E(p.sys, "y")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(y.classification, Classification::Rejected);
  ASSERT_TRUE(y.failing_coefficient.has_value());
  EXPECT_EQ(*y.failing_coefficient, Expr(1));
  const auto x = check_membership({E(p.sys, "1 + 2*x")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(x.classification, Classification::Rejected);
}

TEST(Membership, Example4PolynomialCertificates) {
  const auto p = prepare(load_system("ex4"));
  const auto c = check_membership({E(p.sys, "b*x - a*z")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(c.classification, Classification::GeneralizedFirstIntegral);
  ASSERT_EQ(c.field_certificates.size(), 3u);
  for (const auto& q : c.field_certificates) {
    ASSERT_TRUE(q.has_value());
    EXPECT_TRUE(q->is_polynomial());
  }
  // f rho = b (b x - a z): certificate b.
  EXPECT_EQ(*c.field_certificates[0], E(p.sys, "b"));
}

TEST(Membership, Example4CaseBIsAFirstIntegral) {
  const auto p = prepare(load_system("ex4_ydrift"));
  EXPECT_EQ(check_membership({E(p.sys, "b*x - a*z")}, p.theta, p.sys, p.domain, 9).classification,
            Classification::FirstIntegral);
}

TEST(Membership, DegenerateCandidatesAreRejected) {
  const auto p = prepare(load_system("ex1"));
  const auto sq = check_membership({E(p.sys, "z^2")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(sq.classification, Classification::Rejected);
  EXPECT_NE(sq.reason.find("NonDegeneracyFailure"), std::string::npos);
  const auto empty = check_membership({E(p.sys, "z^2 + 1")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(empty.classification, Classification::Rejected);
}

TEST(Membership, SystemsOfTwoFunctions) {
  // g1 = d/dx, g2 = d/dy + z d/dz + x w d/dw: {z = w = 0} is invariant.
  const auto p = prepare(parse_system("states: x y z w\ncontrol g1: [1, 0, 0, 0]\ncontrol g2: [0, 1, z, x*w]\n"));
  const auto both = check_membership({E(p.sys, "z"), E(p.sys, "w")}, p.theta, p.sys, p.domain, 9);
  EXPECT_NE(both.classification, Classification::Rejected);
  const auto bad = check_membership({E(p.sys, "z"), E(p.sys, "x")}, p.theta, p.sys, p.domain, 9);
  EXPECT_EQ(bad.classification, Classification::Rejected);
}

TEST(Membership, GeneralizedIntegralsHaveFieldCertificates) {
  for (const char* stem : {"ex1", "ex2", "ex4"}) {
    const auto p = prepare(load_system(stem));
    for (const auto& rho : gfi_candidates(p.torsion, 1, 3, p.domain, p.sys.n(), 5)) {
      const auto c = check_membership({rho}, p.theta, p.sys, p.domain, 9);
      if (c.classification == Classification::Rejected) {
        EXPECT_TRUE(c.failing_coefficient.has_value()) << stem;
        continue;
      }
      ASSERT_EQ(c.classification, Classification::GeneralizedFirstIntegral) << stem;
      for (const auto& q : c.field_certificates) EXPECT_TRUE(q.has_value()) << stem;
    }
  }
}

TEST(ZeroLocus, SamplesLieOnTheLocus) {
  const auto sys = load_system("ex4");
  const Domain dom = sys.domain();
  const Expr rho = E(sys, "b*x - a*z + x*cos(w)");
  const ZeroLocusSampler linear({rho}, dom, 4);
  const ZeroLocusSampler curved({E(sys, "x^2 + y^2 - 1")}, dom, 4);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto p = linear.sample(rng);
    ASSERT_TRUE(p.has_value());
    EXPECT_LT(std::abs(evaluate(rho, *p)), kZeroLocusResidual);
    const auto q = curved.sample(rng);
    ASSERT_TRUE(q.has_value());
    EXPECT_NEAR(q->at(0) * q->at(0) + q->at(1) * q->at(1), 1.0, 1e-9);
  }
}
