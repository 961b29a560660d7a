#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pfaffian/domain.hpp"
#include "pfaffian/forms.hpp"
#include "pfaffian/system.hpp"

namespace pfaffian {

// Expr flattened for repeated double evaluation: atoms are the value, cos
// and sin of each symbol, filled once per point.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);
  // atoms[3*s] = x_s, atoms[3*s+1] = cos x_s, atoms[3*s+2] = sin x_s.
  // Throws EvalSingular when |denominator| < 1e-12.
  double operator()(const std::vector<double>& atoms) const;

 private:
  struct Term {
    double coefficient;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> powers;  // atom slot, exponent
  };
  static std::vector<Term> compile(const Poly& p);
  static double eval(const std::vector<Term>& terms, const std::vector<double>& atoms);
  std::vector<Term> num_, den_;
  bool polynomial_ = true;
};

void fill_atoms(const std::vector<double>& values, std::vector<double>& atoms);

struct Trajectory {
  double h = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> x;    // states per sample
  std::vector<std::vector<double>> u;    // control active on [t_k, t_k + h)
  std::vector<std::vector<double>> rho;  // monitored functions per sample
  ControlSchedule schedule;
  double arc_length = 0.0;
  // Set when the run stopped early; samples up to the stop are kept.
  std::optional<std::string> stopped;

  std::string to_csv(const ControlAffineSystem& sys) const;
};

// Numeric instance of a system: fields compiled, parameters fixed.
class NumericSystem {
 public:
  // `point` supplies values for every parameter (states are ignored).
  NumericSystem(const ControlAffineSystem& sys, const Domain& domain, const Assignment& point);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  // f(x) + sum_j g_j(x) u_j; throws StepSingular.
  std::vector<double> velocity(const std::vector<double>& x, const std::vector<double>& u) const;
  // Throws DomainExit when a declared nonzero constraint is within 1e-6 of
  // zero or has changed sign relative to `reference_signs`.
  void check_domain(const std::vector<double>& x, const std::vector<int>& reference_signs) const;
  std::vector<int> constraint_signs(const std::vector<double>& x) const;
  double monitor(const CompiledExpr& e, const std::vector<double>& x) const;

 private:
  std::vector<double> atoms(const std::vector<double>& x) const;
  std::size_t n_, m_;
  std::vector<double> values_;  // all symbols; states overwritten per call
  std::vector<CompiledExpr> drift_;
  std::vector<std::vector<CompiledExpr>> controls_;
  std::vector<CompiledExpr> constraints_;
};

inline constexpr double kDomainMargin = 1e-6;

// Fixed-step RK4 on a grid of step h; each piece runs round(duration / h)
// steps, restarting at piece boundaries. Throws StepSingular / DomainExit.
Trajectory simulate(const ControlAffineSystem& sys, const Domain& domain, const Assignment& x0,
                    const ControlSchedule& sched, double h, const std::vector<Expr>& monitored = {});
// As simulate, but a failing step ends the run and is recorded in `stopped`.
// `escape` > 0 also stops once some |rho| exceeds it.
Trajectory simulate_until(const ControlAffineSystem& sys, const Domain& domain, const Assignment& x0,
                          const ControlSchedule& sched, double h, const std::vector<Expr>& monitored,
                          double escape = 0.0);

struct InvarianceTrial {
  std::uint64_t seed = 0;
  double max_abs = 0.0;
  double arc_length = 0.0;
  double tolerance = 0.0;
  std::optional<std::string> stopped;
};

enum class InvarianceStatus { Held, Violated };
const char* to_string(InvarianceStatus s);

struct InvarianceVerdict {
  double max_abs = 0.0;
  std::vector<InvarianceTrial> trials;
  InvarianceStatus verdict = InvarianceStatus::Held;
  std::uint64_t seed = 0;
  std::size_t stopped_trials = 0;
};

inline constexpr double kInvarianceScale = 1e-6;

// Random starts on {rho = 0}, `pieces` controls from [-1, 1]^m with random
// durations summing to the horizon; Held iff every trial keeps
// max |rho| <= 1e-6 (1 + arc length).
InvarianceVerdict invariance_test(const ControlAffineSystem& sys, const Domain& domain, const std::vector<Expr>& rho,
                                  int trials, int pieces, double horizon, double h, std::uint64_t seed);

struct Escape {
  Assignment start;
  ControlSchedule schedule;
  double time = 0.0;
  double value = 0.0;
};

inline constexpr double kEscapeThreshold = 0.1;
inline constexpr double kEscapeHorizon = 5.0;
inline constexpr int kEscapeStarts = 20;
inline constexpr int kEscapeRandomControls = 50;

// First single-piece constant control (axis values 0, +-e_j, then 50 random
// values) that drives some |rho| above 0.1 within the horizon, from up to 20
// zero-locus starts.
std::optional<Escape> escape_test(const ControlAffineSystem& sys, const Domain& domain, const std::vector<Expr>& rho,
                                  std::uint64_t seed, double h = 1e-2);

VectorField lie_bracket(const VectorField& X, const VectorField& Y);

struct BracketRank {
  std::size_t rank = 0;
  std::size_t depth = 0;  // depth at which the rank was reached
  std::vector<VectorField> vectors;
  std::vector<std::string> labels;  // "g1", "[g1,g2]", ...
};

inline constexpr double kBracketThreshold = 1e-8;
inline constexpr std::size_t kDefaultBracketDepth = 4;

// Left-iterated brackets [X_i1, [X_i2, ... X_ik]] up to `depth`, evaluated at
// p; stops early at full rank. Throws InvalidArgument for depth 0 and
// EvalSingular at p.
BracketRank bracket_rank(const std::vector<VectorField>& fields, const std::vector<std::string>& names,
                         const Assignment& p, std::size_t depth = kDefaultBracketDepth);

struct LeafControllability {
  Assignment point;
  std::size_t rank = 0;
  std::size_t leaf_dimension = 0;
  bool tangent = true;
  bool controllable = false;
};

// bracket_rank of the control fields at a point p of the leaf {rho = c}.
LeafControllability leaf_controllability(const ControlAffineSystem& sys, const std::vector<Expr>& rho,
                                         const Assignment& p, std::size_t depth = kDefaultBracketDepth);

// Random point with states uniform in [-2, 2] and parameters honouring their
// signs, inside the domain.
Assignment generic_point(const Domain& domain, Rng& rng);

// Type (nu, l) of D = span{f, g_j} from D(k+1) = D(k) + [D(k), D(k)] at a
// generic point.
std::pair<std::size_t, std::size_t> numeric_distribution_type(const ControlAffineSystem& sys, const Assignment& p,
                                                             std::size_t max_steps = 8);

}  // namespace pfaffian
