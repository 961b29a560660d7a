#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pfaffian/flag.hpp"
#include "pfaffian/integrals.hpp"
#include "pfaffian/numeric.hpp"
#include "pfaffian/system.hpp"

namespace pfaffian {

inline constexpr int kReportSchema = 1;

struct AnalysisConfig {
  std::uint64_t seed = 42;
  int trials = 100;
  int pieces = 10;
  double horizon = 5.0;
  double step = 1e-3;
  std::size_t dmax = 3;
  int levels = 5;      // leaves {rho = c} tested per first integral
  bool numeric = true;  // run invariance / escape / bracket checks
};

struct StageError {
  std::string stage;
  std::string module;
  std::string kind;
  std::string message;
};

// One invariant set (a leaf family or an isolated submanifold) with its
// evidence.
struct InvariantSet {
  CandidateIntegral candidate;
  std::vector<std::string> declared_as;  // names of matching user candidates
  // (c, verdict) per tested level set rho = c; c = 0 for isolated sets.
  std::vector<std::pair<double, InvarianceVerdict>> invariance;
  std::optional<LeafControllability> controllability;
};

struct RejectedCandidate {
  CandidateIntegral candidate;
  std::vector<std::string> declared_as;
  std::optional<Escape> escape;
};

struct InvariantReport {
  AnalysisConfig config;
  ControlAffineSystem system;
  std::optional<PfaffianFlag> flag;
  std::optional<std::pair<std::size_t, std::size_t>> numeric_distribution_type;
  std::vector<Expr> gfi_candidates;
  std::vector<InvariantSet> foliation;
  std::vector<InvariantSet> isolated;
  std::vector<RejectedCandidate> rejected;
  std::vector<CandidateIntegral> undetermined;
  std::vector<StageError> errors;

  std::string conclusion() const;
};

// derived flag -> first integrals -> torsion-minor candidates and membership
// -> user candidates -> numeric evidence. Stage failures are recorded in
// `errors` and the report keeps what was computed before them.
InvariantReport analyze(const ControlAffineSystem& sys, const AnalysisConfig& config = {});

nlohmann::json flag_to_json(const PfaffianFlag& flag, const ControlAffineSystem& sys);
nlohmann::json torsion_to_json(const TorsionMatrix& T, const ControlAffineSystem& sys);
nlohmann::json candidate_to_json(const CandidateIntegral& c, const ControlAffineSystem& sys);
nlohmann::json invariance_to_json(const InvarianceVerdict& v);
nlohmann::json escape_to_json(const Escape& e, const ControlAffineSystem& sys);
nlohmann::json to_json(const InvariantReport& report);

// Human-readable rendering of a report's JSON (nothing beyond it).
std::string render_text(const nlohmann::json& report);

}  // namespace pfaffian
