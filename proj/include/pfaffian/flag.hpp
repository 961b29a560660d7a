#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "pfaffian/domain.hpp"
#include "pfaffian/forms.hpp"
#include "pfaffian/linalg.hpp"
#include "pfaffian/system.hpp"

namespace pfaffian {

// Independent 1-forms theta^1..theta^s with their coframe pivots.
struct PfaffianSystem {
  std::vector<DifferentialForm> generators;
  // Coordinates solved for when reducing mod (theta); set by complete_coframe.
  std::vector<std::size_t> pivots;
  Expr pivot_determinant{1};
  // Nonzero conditions this level added to the working domain.
  std::vector<Expr> constraints;

  std::size_t rank() const { return generators.size(); }
  ExprMatrix coefficient_matrix() const;
};

// Coefficients of d theta^l on omega^j ^ omega^k (j < k), omega = dx_coframe.
struct TorsionMatrix {
  std::vector<std::size_t> coframe;
  std::vector<std::pair<std::size_t, std::size_t>> columns;  // positions in coframe
  ExprMatrix entries;                                        // s rows
  bool is_zero() const;
};

struct FlagLevel {
  PfaffianSystem system;
  TorsionMatrix torsion;
  std::size_t torsion_rank = 0;
};

// I = I(0) > I(1) > ... > I(nu); levels.back() is the terminal system.
struct PfaffianFlag {
  std::vector<FlagLevel> levels;
  std::size_t nu = 0;
  std::size_t q = 0;
  Domain domain;  // working domain with every recorded constraint

  const PfaffianSystem& terminal() const { return levels.back().system; }
  // Type of the dual distribution flag.
  std::pair<std::size_t, std::size_t> distribution_type(std::size_t n) const { return {nu, n - q}; }
};

inline constexpr int kRankSamplePoints = 20;
inline constexpr double kRankThreshold = 1e-8;

// Throws RankNotConstant unless the numeric rank of m equals `rank` at
// kRankSamplePoints points of the domain.
void check_rank_constancy(const ExprMatrix& m, std::size_t rank, const Domain& domain, std::uint64_t seed,
                          const char* what);

// 1-forms annihilating f, g_1..g_m; throws RankNotConstant.
PfaffianSystem annihilator(const ControlAffineSystem& sys, const Domain& domain, std::uint64_t seed);

// Chooses pivots (first s-subset of coordinates whose determinant is a
// constant, else nonzero by assumption, else ProvenNonzero), records the
// determinant's new factors as constraints in theta and the domain, and
// returns the complementary coordinates. Throws NoValidCompletion.
std::vector<std::size_t> complete_coframe(PfaffianSystem& theta, Domain& domain, std::uint64_t seed);

TorsionMatrix torsion(const PfaffianSystem& theta, const Domain& domain, std::uint64_t seed);

// Generators sum_g a_g theta^g for a basis of the left null space of T;
// throws RankUndecidable.
PfaffianSystem derived_system(const PfaffianSystem& theta, const TorsionMatrix& T, const Domain& domain,
                              std::uint64_t seed, std::size_t* torsion_rank = nullptr);

PfaffianFlag derived_flag(const ControlAffineSystem& sys, std::uint64_t seed);

}  // namespace pfaffian
