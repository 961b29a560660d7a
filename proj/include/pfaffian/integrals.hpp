#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfaffian/domain.hpp"
#include "pfaffian/flag.hpp"
#include "pfaffian/forms.hpp"
#include "pfaffian/system.hpp"

namespace pfaffian {

enum class Classification { FirstIntegral, GeneralizedFirstIntegral, Rejected, Undetermined };
enum class Provenance { FromFlag, FromTorsionMinors, UserDeclared };

const char* to_string(Classification c);
const char* to_string(Provenance p);

// Per component rho^mu: d rho^mu reduced mod (theta) and the quotients of its
// coefficients by rho (d = 1) or the sequential-division quotients (d >= 2).
struct MembershipEvidence {
  DifferentialForm reduced;
  // One entry per nonzero reduced coefficient, keyed by the free
  // coordinate; quotients[k][nu] multiplies rho^nu.
  std::vector<std::size_t> coordinates;
  std::vector<std::vector<Expr>> quotients;
};

struct CandidateIntegral {
  std::string name;
  std::vector<Expr> rho;
  Classification classification = Classification::Undetermined;
  Provenance provenance = Provenance::UserDeclared;
  // FirstIntegral from the flag: the closed 1-form that was integrated.
  std::optional<DifferentialForm> exactness_witness;
  std::vector<MembershipEvidence> membership;
  // X rho / rho for X = f, g_1..g_m (d = 1); nullopt where it is not exact.
  std::vector<std::optional<Expr>> field_certificates;
  // Rejected / Undetermined: what failed, and the coefficient concerned.
  std::string reason;
  std::optional<Expr> failing_coefficient;
  bool numeric_only = false;  // Undetermined by the numeric fallback
};

inline constexpr double kZeroLocusResidual = 1e-10;
inline constexpr int kNewtonSteps = 20;
inline constexpr double kNewtonCorrection = 1e-8;
inline constexpr int kMembershipFallbackPoints = 50;
inline constexpr double kMembershipFallbackTolerance = 1e-8;
inline constexpr int kNonDegeneracyPoints = 8;

// Points of {rho = 0} in the domain: solve for one state when rho (d = 1) is
// linear in it, otherwise project a random point with damped Gauss-Newton
// steps. A point is accepted when |rho| <= kZeroLocusResidual and the next
// Newton correction is below kNewtonCorrection. Returns nullopt after
// `attempts` failed draws.
class ZeroLocusSampler {
 public:
  ZeroLocusSampler(std::vector<Expr> rho, const Domain& domain, std::size_t n);
  std::optional<Assignment> sample(Rng& rng, int attempts = 200) const;
  // d x n Jacobian of rho at p.
  Eigen::MatrixXd jacobian(const Assignment& p) const;

 private:
  std::vector<Expr> rho_;
  Domain domain_;
  std::size_t n_;
  std::vector<std::vector<Expr>> gradient_;
  std::optional<SymbolId> linear_state_;
};

// d rho^1 ^ ... ^ d rho^d != 0 at kNonDegeneracyPoints zero-locus points.
// Empty zero loci count as degenerate.
bool non_degenerate(const std::vector<Expr>& rho, const Domain& domain, std::size_t n, std::uint64_t seed,
                    std::string* why = nullptr);

// rho with d rho = omega for a closed 1-form, normalised to vanish at the
// origin when it is finite there; nullopt when some antiderivative leaves
// the expression class. Throws NotClosed.
std::optional<Expr> poincare_integrate(const DifferentialForm& omega);

// Integrals of closed terminal generators and of closed constant-coefficient
// pairs; other generators are reported as Undetermined.
std::vector<CandidateIntegral> first_integrals(const PfaffianFlag& flag, const ControlAffineSystem& sys);

// Non-degenerate common factors of all nonzero (s-d+1)-minors of T, for
// d = 1..min(dmax, s), deduplicated up to units. Throws NotPolynomial when a
// minor has a denominator that is not nonzero on the domain.
std::vector<Expr> gfi_candidates(const TorsionMatrix& T, std::size_t s, std::size_t dmax, const Domain& domain,
                                 std::size_t n, std::uint64_t seed);

// Classifies rho by d rho^mu in (rho, theta). theta must carry pivots.
CandidateIntegral check_membership(const std::vector<Expr>& rho, const PfaffianSystem& theta,
                                   const ControlAffineSystem& sys, const Domain& domain, std::uint64_t seed);

}  // namespace pfaffian
