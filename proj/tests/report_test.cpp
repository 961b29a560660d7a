#include <gtest/gtest.h>

#include "pfaffian/factor.hpp"
#include "pfaffian/report.hpp"
#include "test_support.hpp"

using namespace pfaffian;
using testing_support::load_system;

namespace {

AnalysisConfig quick() {
  AnalysisConfig c;
  c.trials = 10;
  c.levels = 2;
  return c;
}

bool same_up_to_unit(const Expr& a, const Expr& b) {
  return a.is_polynomial() && b.is_polynomial() && unit_normal(a.numerator()) == unit_normal(b.numerator());
}

Expr E(const ControlAffineSystem& sys, const std::string& s) { return parse_expr(s, sys.symbols); }

std::vector<std::string> rhos(const std::vector<InvariantSet>& sets, const ControlAffineSystem& sys) {
  std::vector<std::string> out;
  for (const auto& s : sets) out.push_back(s.candidate.rho[0].to_string(sys.symbols));
  return out;
}

}  // namespace

TEST(Analyze, Example1IsolatedPlane) {
  const auto sys = load_system("ex1");
  const auto r = analyze(sys, quick());
  EXPECT_TRUE(r.errors.empty());
  ASSERT_EQ(r.isolated.size(), 1u);
  EXPECT_TRUE(same_up_to_unit(r.isolated[0].candidate.rho[0], E(sys, "z")));
  EXPECT_EQ(r.isolated[0].candidate.classification, Classification::GeneralizedFirstIntegral);
  ASSERT_TRUE(r.isolated[0].controllability);
  EXPECT_EQ(r.isolated[0].controllability->rank, 2u);
  EXPECT_TRUE(r.isolated[0].controllability->controllable);
  ASSERT_EQ(r.isolated[0].invariance.size(), 1u);
  EXPECT_EQ(r.isolated[0].invariance[0].second.verdict, InvarianceStatus::Held);
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_TRUE(same_up_to_unit(r.rejected[0].candidate.rho[0], E(sys, "1 + x")));
  EXPECT_TRUE(r.rejected[0].escape.has_value());
  EXPECT_TRUE(r.foliation.empty());
  EXPECT_EQ(r.conclusion(), "1 isolated invariant submanifold: {z = 0}");
}

TEST(Analyze, Example2HasNoInvariantSubmanifolds) {
  const auto sys = load_system("ex2");
  const auto r = analyze(sys, quick());
  EXPECT_TRUE(r.isolated.empty());
  EXPECT_TRUE(r.foliation.empty());
  ASSERT_EQ(r.rejected.size(), 2u);
  for (const auto& rej : r.rejected) {
    ASSERT_TRUE(rej.escape.has_value());
    if (same_up_to_unit(rej.candidate.rho[0], E(sys, "y"))) {
      ASSERT_TRUE(rej.candidate.failing_coefficient);
      EXPECT_EQ(*rej.candidate.failing_coefficient, Expr(1));
    }
  }
  EXPECT_EQ(r.conclusion(), "no invariant submanifolds");
}

TEST(Analyze, Example3Foliation) {
  const auto sys = load_system("ex3");
  const auto r = analyze(sys, quick());
  ASSERT_TRUE(r.flag);
  EXPECT_EQ(r.flag->nu, 1u);
  EXPECT_EQ(r.flag->q, 1u);
  ASSERT_EQ(r.foliation.size(), 1u);
  EXPECT_TRUE(same_up_to_unit(r.foliation[0].candidate.rho[0], E(sys, "b*x - a*z")));
  ASSERT_EQ(r.foliation[0].invariance.size(), 2u);
  for (const auto& [c, v] : r.foliation[0].invariance) EXPECT_EQ(v.verdict, InvarianceStatus::Held);
  ASSERT_TRUE(r.foliation[0].controllability);
  EXPECT_EQ(r.foliation[0].controllability->rank, 3u);
  EXPECT_TRUE(r.foliation[0].controllability->controllable);
  EXPECT_TRUE(r.isolated.empty());
  EXPECT_TRUE(r.gfi_candidates.empty());
}

TEST(Analyze, Example4GeneralizedFirstIntegral) {
  const auto sys = load_system("ex4");
  const auto r = analyze(sys, quick());
  ASSERT_EQ(r.isolated.size(), 1u);
  const auto& c = r.isolated[0].candidate;
  EXPECT_TRUE(same_up_to_unit(c.rho[0], E(sys, "b*x - a*z")));
  EXPECT_EQ(c.classification, Classification::GeneralizedFirstIntegral);
  EXPECT_EQ(r.isolated[0].declared_as, std::vector<std::string>{"rho"});
  for (const auto& q : c.field_certificates) {
    ASSERT_TRUE(q);
    EXPECT_TRUE(q->is_polynomial());
  }
}

TEST(Analyze, Example4DriftCases) {
  const auto ydrift = load_system("ex4_ydrift");
  const auto r = analyze(ydrift, quick());
  ASSERT_EQ(r.foliation.size(), 1u);
  EXPECT_EQ(r.foliation[0].candidate.classification, Classification::FirstIntegral);
  EXPECT_TRUE(same_up_to_unit(r.foliation[0].candidate.rho[0], E(ydrift, "b*x - a*z")));

  // Drift inside the span of the controls: same invariant sets as driftless.
  const auto spanned = load_system("ex4_spanned");
  const auto driftless = load_system("ex3");
  const auto a = analyze(spanned, quick()), b = analyze(driftless, quick());
  EXPECT_EQ(rhos(a.foliation, spanned), rhos(b.foliation, driftless));
  EXPECT_EQ(rhos(a.isolated, spanned), rhos(b.isolated, driftless));
  EXPECT_EQ(a.conclusion(), b.conclusion());
}

TEST(Analyze, SymbolicOnlyRunSkipsNumerics) {
  auto config = quick();
  config.numeric = false;
  const auto r = analyze(load_system("ex1"), config);
  ASSERT_EQ(r.isolated.size(), 1u);
  EXPECT_TRUE(r.isolated[0].invariance.empty());
  EXPECT_FALSE(r.numeric_distribution_type);
}

TEST(Analyze, StageErrorsAreRecorded) {
  const auto sys = parse_system("states: x y\ncontrol g1: [x*(x - 1)*(x + 1)*(2*x - 1)*(2*x + 1), 0]\n");
  bool failed = false;
  for (std::uint64_t seed = 1; seed <= 20 && !failed; ++seed) {
    auto config = quick();
    config.seed = seed;
    const auto r = analyze(sys, config);
    if (r.errors.empty()) continue;
    failed = true;
    EXPECT_EQ(r.errors[0].stage, "flag");
    EXPECT_EQ(r.errors[0].kind, "RankNotConstant");
    EXPECT_FALSE(r.flag);
    EXPECT_EQ(to_json(r)["conclusion"], "analysis incomplete");
  }
  EXPECT_TRUE(failed);
}

TEST(ReportJson, SchemaAndDeterminism) {
  const auto sys = load_system("ex1");
  const auto a = to_json(analyze(sys, quick())).dump();
  const auto b = to_json(analyze(sys, quick())).dump();
  EXPECT_EQ(a, b);
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["isolated"][0]["rho"], "z");
  EXPECT_EQ(j["type"], nlohmann::json({1, 0}));
  EXPECT_EQ(j["flag"]["levels"][0]["torsion"]["columns"], nlohmann::json({"dx^dy"}));
}

TEST(ReportJson, TextIsRenderedFromJson) {
  const auto j = to_json(analyze(load_system("ex2"), quick()));
  const auto text = render_text(j);
  EXPECT_NE(text.find("conclusion: no invariant submanifolds"), std::string::npos);
  EXPECT_NE(text.find("coefficient of dy is not divisible by rho (coefficient 1)"), std::string::npos);
  // The text view is a function of the JSON alone.
  EXPECT_EQ(render_text(nlohmann::json::parse(j.dump())), text);
}
