#include "pfaffian/report.hpp"

#include <algorithm>
#include <sstream>

#include "pfaffian/error.hpp"
#include "pfaffian/factor.hpp"

namespace pfaffian {

using nlohmann::json;

namespace {

std::string str(const Expr& e, const ControlAffineSystem& sys) { return e.to_string(sys.symbols); }

const char* sign_name(ParamSign s) {
  switch (s) {
    case ParamSign::Positive: return ">0";
    case ParamSign::Negative: return "<0";
    case ParamSign::Nonzero: return "!=0";
    case ParamSign::Any: return "any";
  }
  return "any";
}

StageError stage_error(const std::string& stage, const Error& e) {
  return {stage, e.module(), to_string(e.kind()), e.message()};
}

bool same_up_to_unit(const Expr& a, const Expr& b) {
  if (!a.is_polynomial() || !b.is_polynomial()) return a == b;
  return unit_normal(a.numerator()) == unit_normal(b.numerator());
}

std::string level_set(const CandidateIntegral& c, const ControlAffineSystem& sys, const std::string& rhs) {
  std::string out = "{";
  for (std::size_t i = 0; i < c.rho.size(); ++i) {
    if (i) out += ", ";
    out += str(c.rho[i], sys) + " = " + rhs;
  }
  return out + "}";
}

std::vector<std::string> field_names(const ControlAffineSystem& sys) {
  std::vector<std::string> names{"f"};
  names.insert(names.end(), sys.control_names.begin(), sys.control_names.end());
  return names;
}

}  // namespace

// ----------------------------------------------------------- analysis

std::string InvariantReport::conclusion() const {
  std::vector<std::string> parts;
  if (!foliation.empty()) {
    std::string s = "foliation by invariant level sets";
    for (std::size_t i = 0; i < foliation.size(); ++i) s += (i ? ", " : " ") + level_set(foliation[i].candidate, system, "c");
    parts.push_back(s);
  }
  if (!isolated.empty()) {
    std::string s = std::to_string(isolated.size()) + " isolated invariant submanifold" + (isolated.size() > 1 ? "s" : "") + ":";
    for (std::size_t i = 0; i < isolated.size(); ++i) s += (i ? ", " : " ") + level_set(isolated[i].candidate, system, "0");
    parts.push_back(s);
  }
  if (parts.empty()) {
    if (!errors.empty()) return "analysis incomplete";
    return undetermined.empty() ? "no invariant submanifolds" : "no invariant submanifolds found (some undetermined)";
  }
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
  return out;
}

InvariantReport analyze(const ControlAffineSystem& sys, const AnalysisConfig& config) {
  InvariantReport r;
  r.config = config;
  r.system = sys;
  const std::size_t n = sys.n();
  const std::uint64_t seed = config.seed;
  try {
    r.flag = derived_flag(sys, seed);
  } catch (const Error& e) {
    r.errors.push_back(stage_error("flag", e));
    return r;
  }
  const PfaffianFlag& flag = *r.flag;
  const Domain& dom = flag.domain;
  const PfaffianSystem& theta = flag.levels.front().system;

  try {
    for (auto& c : first_integrals(flag, sys)) {
      if (c.classification == Classification::FirstIntegral) {
        r.foliation.push_back({std::move(c), {}, {}, {}});
      } else {
        r.undetermined.push_back(std::move(c));
      }
    }
  } catch (const Error& e) {
    r.errors.push_back(stage_error("first-integrals", e));
  }

  const TorsionMatrix& T = flag.levels.front().torsion;
  if (theta.rank() > 0 && !T.is_zero()) {
    try {
      r.gfi_candidates = gfi_candidates(T, theta.rank(), config.dmax, dom, n, derive_seed(seed, 11));
    } catch (const Error& e) {
      r.errors.push_back(stage_error("candidates", e));
    }
  }

  // Classifies one function, merging repeats (up to units) by name.
  std::uint64_t k = 0;
  auto classify = [&](const Expr& rho, Provenance provenance, const std::string& name) {
    auto merge = [&](auto& list) {
      for (auto& entry : list) {
        const auto& c = entry.candidate;
        if (c.rho.size() == 1 && same_up_to_unit(c.rho[0], rho)) {
          if (!name.empty()) entry.declared_as.push_back(name);
          return true;
        }
      }
      return false;
    };
    if (merge(r.foliation) || merge(r.isolated) || merge(r.rejected)) return;
    CandidateIntegral c = check_membership({rho}, theta, sys, dom, derive_seed(seed, 20 + k++));
    c.provenance = provenance;
    c.name = name;
    std::vector<std::string> declared;
    if (!name.empty()) declared.push_back(name);
    switch (c.classification) {
      case Classification::FirstIntegral: r.foliation.push_back({std::move(c), declared, {}, {}}); break;
      case Classification::GeneralizedFirstIntegral: r.isolated.push_back({std::move(c), declared, {}, {}}); break;
      case Classification::Rejected: r.rejected.push_back({std::move(c), declared, {}}); break;
      case Classification::Undetermined: r.undetermined.push_back(std::move(c)); break;
    }
  };
  try {
    for (const auto& rho : r.gfi_candidates) classify(rho, Provenance::FromTorsionMinors, "");
    for (std::size_t i = 0; i < sys.candidates.size(); ++i) {
      classify(sys.candidates[i], Provenance::UserDeclared, sys.candidate_names[i]);
    }
  } catch (const Error& e) {
    r.errors.push_back(stage_error("membership", e));
  }

  if (!config.numeric) return r;
  // Numeric evidence runs on the declared domain: invariance does not depend
  // on the chart the symbolic stage worked in.
  const Domain declared = sys.domain();
  try {
    Rng rng(derive_seed(seed, 7));
    r.numeric_distribution_type = numeric_distribution_type(sys, generic_point(dom, rng));
  } catch (const Error& e) {
    r.errors.push_back(stage_error("numeric-type", e));
  }
  for (std::size_t i = 0; i < r.foliation.size(); ++i) {
    auto& set = r.foliation[i];
    const Expr& rho = set.candidate.rho[0];
    try {
      for (int level = 0; level < config.levels; ++level) {
        const std::uint64_t s = derive_seed(seed, 300 + 16 * i + static_cast<std::uint64_t>(level));
        Rng rng(s);
        const Assignment p = generic_point(declared, rng);
        const double c = evaluate(rho, p);
        const Expr shifted = rho - Expr(Rational(c));
        set.invariance.emplace_back(c, invariance_test(sys, declared, {shifted}, config.trials, config.pieces,
                                                       config.horizon, config.step, s));
        if (level == 0) set.controllability = leaf_controllability(sys, {shifted}, p);
      }
    } catch (const Error& e) {
      r.errors.push_back(stage_error("numeric-foliation", e));
    }
  }
  for (std::size_t i = 0; i < r.isolated.size(); ++i) {
    auto& set = r.isolated[i];
    const std::uint64_t s = derive_seed(seed, 500 + i);
    try {
      set.invariance.emplace_back(0.0, invariance_test(sys, declared, set.candidate.rho, config.trials, config.pieces,
                                                       config.horizon, config.step, s));
      Rng rng(derive_seed(s, 1));
      if (const auto p = ZeroLocusSampler(set.candidate.rho, declared, n).sample(rng)) {
        set.controllability = leaf_controllability(sys, set.candidate.rho, *p);
      }
    } catch (const Error& e) {
      r.errors.push_back(stage_error("numeric-isolated", e));
    }
  }
  for (std::size_t i = 0; i < r.rejected.size(); ++i) {
    auto& rej = r.rejected[i];
    try {
      rej.escape = escape_test(sys, declared, rej.candidate.rho, derive_seed(seed, 700 + i));
    } catch (const Error& e) {
      r.errors.push_back(stage_error("numeric-escape", e));
    }
  }
  return r;
}

// ----------------------------------------------------------- JSON

json torsion_to_json(const TorsionMatrix& T, const ControlAffineSystem& sys) {
  json j;
  j["coframe"] = json::array();
  for (std::size_t c : T.coframe) j["coframe"].push_back("d" + sys.symbols.name(static_cast<SymbolId>(c)));
  j["columns"] = json::array();
  for (const auto& [a, b] : T.columns) {
    j["columns"].push_back("d" + sys.symbols.name(static_cast<SymbolId>(T.coframe[a])) + "^d" +
                           sys.symbols.name(static_cast<SymbolId>(T.coframe[b])));
  }
  j["entries"] = json::array();
  for (const auto& row : T.entries) {
    json jr = json::array();
    for (const auto& e : row) jr.push_back(str(e, sys));
    j["entries"].push_back(jr);
  }
  return j;
}

json flag_to_json(const PfaffianFlag& flag, const ControlAffineSystem& sys) {
  json j;
  j["levels"] = json::array();
  for (const auto& level : flag.levels) {
    json jl;
    jl["rank"] = level.system.rank();
    jl["generators"] = json::array();
    for (const auto& g : level.system.generators) jl["generators"].push_back(g.to_string(sys.symbols));
    jl["pivots"] = json::array();
    for (std::size_t p : level.system.pivots) jl["pivots"].push_back("d" + sys.symbols.name(static_cast<SymbolId>(p)));
    jl["pivot_determinant"] = str(level.system.pivot_determinant, sys);
    jl["constraints"] = json::array();
    for (const auto& c : level.system.constraints) jl["constraints"].push_back(str(c, sys));
    jl["torsion"] = torsion_to_json(level.torsion, sys);
    jl["torsion_rank"] = level.torsion_rank;
    j["levels"].push_back(jl);
  }
  j["type"] = {flag.nu, flag.q};
  j["distribution_type"] = {flag.nu, sys.n() - flag.q};
  return j;
}

json candidate_to_json(const CandidateIntegral& c, const ControlAffineSystem& sys) {
  json j;
  if (c.rho.size() == 1) {
    j["rho"] = str(c.rho[0], sys);
  } else {
    j["rho"] = json::array();
    for (const auto& r : c.rho) j["rho"].push_back(str(r, sys));
  }
  if (!c.name.empty()) j["name"] = c.name;
  j["classification"] = to_string(c.classification);
  j["provenance"] = to_string(c.provenance);
  if (c.exactness_witness) j["witness"] = c.exactness_witness->to_string(sys.symbols);
  if (!c.membership.empty()) {
    j["membership"] = json::array();
    for (const auto& ev : c.membership) {
      json je;
      je["reduced"] = ev.reduced.to_string(sys.symbols);
      je["quotients"] = json::array();
      for (std::size_t i = 0; i < ev.coordinates.size(); ++i) {
        json q;
        q["coordinate"] = "d" + sys.symbols.name(static_cast<SymbolId>(ev.coordinates[i]));
        if (ev.quotients[i].size() == 1) {
          q["quotient"] = str(ev.quotients[i][0], sys);
        } else {
          q["quotient"] = json::array();
          for (const auto& e : ev.quotients[i]) q["quotient"].push_back(str(e, sys));
        }
        je["quotients"].push_back(q);
      }
      j["membership"].push_back(je);
    }
  }
  if (!c.field_certificates.empty()) {
    const auto names = field_names(sys);
    j["field_certificates"] = json::array();
    for (std::size_t i = 0; i < c.field_certificates.size(); ++i) {
      json q;
      q["field"] = names[i];
      q["quotient"] = c.field_certificates[i] ? json(str(*c.field_certificates[i], sys)) : json(nullptr);
      j["field_certificates"].push_back(q);
    }
  }
  if (!c.reason.empty()) j["reason"] = c.reason;
  if (c.failing_coefficient) j["coefficient"] = str(*c.failing_coefficient, sys);
  if (c.numeric_only) j["numeric_only"] = true;
  return j;
}

json invariance_to_json(const InvarianceVerdict& v) {
  json j;
  j["verdict"] = to_string(v.verdict);
  j["trials"] = v.trials.size();
  j["max_abs"] = v.max_abs;
  j["stopped_trials"] = v.stopped_trials;
  j["seed"] = v.seed;
  double worst = 0.0;
  json per = json::array();
  for (const auto& t : v.trials) {
    if (t.tolerance > 0) worst = std::max(worst, t.max_abs / t.tolerance);
    json jt{{"seed", t.seed}, {"max_abs", t.max_abs}, {"arc_length", t.arc_length}, {"tolerance", t.tolerance}};
    if (t.stopped) jt["stopped"] = *t.stopped;
    per.push_back(jt);
  }
  j["worst_ratio"] = worst;
  j["per_trial"] = per;
  return j;
}

json escape_to_json(const Escape& e, const ControlAffineSystem& sys) {
  json j;
  json start = json::object();
  for (const auto& [s, v] : e.start) start[sys.symbols.name(s)] = v;
  j["start"] = start;
  j["control"] = e.schedule.pieces.empty() ? json::array() : json(e.schedule.pieces.front().value);
  j["duration"] = e.schedule.horizon();
  j["time"] = e.time;
  j["value"] = e.value;
  return j;
}

namespace {

json controllability_to_json(const LeafControllability& c) {
  return json{{"rank", c.rank},
              {"leaf_dimension", c.leaf_dimension},
              {"tangent", c.tangent},
              {"controllable", c.controllable}};
}

json set_to_json(const InvariantSet& s, const ControlAffineSystem& sys, std::size_t leaf_dimension) {
  json j = candidate_to_json(s.candidate, sys);
  j["leaf_dimension"] = leaf_dimension;
  if (!s.declared_as.empty()) j["declared_as"] = s.declared_as;
  j["invariance"] = json::array();
  for (const auto& [c, v] : s.invariance) {
    json jv = invariance_to_json(v);
    jv["level"] = c;
    j["invariance"].push_back(jv);
  }
  j["controllability"] = s.controllability ? controllability_to_json(*s.controllability) : json(nullptr);
  return j;
}

}  // namespace

json to_json(const InvariantReport& r) {
  const auto& sys = r.system;
  json j;
  j["schema"] = kReportSchema;
  j["seed"] = r.config.seed;
  j["config"] = {{"trials", r.config.trials}, {"pieces", r.config.pieces}, {"horizon", r.config.horizon},
                 {"step", r.config.step},     {"dmax", r.config.dmax},     {"levels", r.config.levels},
                 {"numeric", r.config.numeric}};
  json js;
  js["text"] = print_system(sys);
  js["states"] = sys.symbols.states();
  js["parameters"] = json::array();
  for (const auto& p : sys.symbols.params()) js["parameters"].push_back({{"name", p.name}, {"sign", sign_name(p.sign)}});
  if (sys.has_drift()) {
    js["drift"] = json::array();
    for (const auto& c : sys.drift) js["drift"].push_back(str(c, sys));
  } else {
    js["drift"] = nullptr;
  }
  js["controls"] = json::array();
  for (std::size_t i = 0; i < sys.m(); ++i) {
    json field = json::array();
    for (const auto& c : sys.controls[i]) field.push_back(str(c, sys));
    js["controls"].push_back({{"name", sys.control_names[i]}, {"field", field}});
  }
  j["system"] = js;

  if (r.flag) {
    j["flag"] = flag_to_json(*r.flag, sys);
    j["type"] = {r.flag->nu, r.flag->q};
  } else {
    j["flag"] = nullptr;
    j["type"] = nullptr;
  }
  j["numeric_distribution_type"] =
      r.numeric_distribution_type ? json{r.numeric_distribution_type->first, r.numeric_distribution_type->second}
                                  : json(nullptr);
  j["candidates"] = json::array();
  for (const auto& c : r.gfi_candidates) j["candidates"].push_back(str(c, sys));
  const std::size_t q = r.flag ? r.flag->q : 0;
  j["foliation"] = json::array();
  for (const auto& s : r.foliation) j["foliation"].push_back(set_to_json(s, sys, sys.n() - q));
  j["isolated"] = json::array();
  for (const auto& s : r.isolated) j["isolated"].push_back(set_to_json(s, sys, sys.n() - s.candidate.rho.size()));
  j["rejected"] = json::array();
  for (const auto& rej : r.rejected) {
    json jr = candidate_to_json(rej.candidate, sys);
    if (!rej.declared_as.empty()) jr["declared_as"] = rej.declared_as;
    jr["escape"] = rej.escape ? escape_to_json(*rej.escape, sys) : json(nullptr);
    j["rejected"].push_back(jr);
  }
  j["undetermined"] = json::array();
  for (const auto& c : r.undetermined) j["undetermined"].push_back(candidate_to_json(c, sys));
  j["constraints"] = json::array();
  if (r.flag) {
    for (const auto& c : r.flag->domain.nonzero()) j["constraints"].push_back(str(c, sys));
  }
  j["errors"] = json::array();
  for (const auto& e : r.errors) {
    j["errors"].push_back({{"stage", e.stage}, {"module", e.module}, {"kind", e.kind}, {"message", e.message}});
  }
  j["conclusion"] = r.conclusion();
  return j;
}

// ----------------------------------------------------------- text

namespace {

std::string join(const json& arr, const std::string& sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (i) out += sep;
    out += arr[i].is_string() ? arr[i].get<std::string>() : arr[i].dump();
  }
  return out;
}

std::string rho_text(const json& c) { return c["rho"].is_string() ? c["rho"].get<std::string>() : join(c["rho"]); }

std::string pair_text(const json& p) {
  return p.is_null() ? "n/a" : "(" + p[0].dump() + ", " + p[1].dump() + ")";
}

void candidate_details(std::ostringstream& out, const json& c) {
  if (c.contains("witness")) out << "      integrates " << c["witness"].get<std::string>() << "\n";
  if (c.contains("membership")) {
    for (const auto& ev : c["membership"]) {
      out << "      d rho mod theta = " << ev["reduced"].get<std::string>();
      if (!ev["quotients"].empty()) {
        out << "; quotients by rho:";
        for (const auto& q : ev["quotients"]) {
          out << " " << q["coordinate"].get<std::string>() << ": "
              << (q["quotient"].is_string() ? q["quotient"].get<std::string>() : join(q["quotient"]));
        }
      }
      out << "\n";
    }
  }
  if (c.contains("field_certificates")) {
    out << "      X rho / rho:";
    for (const auto& q : c["field_certificates"]) {
      out << " " << q["field"].get<std::string>() << ": "
          << (q["quotient"].is_null() ? std::string("not exact") : q["quotient"].get<std::string>());
    }
    out << "\n";
  }
  if (c.contains("reason")) {
    out << "      " << c["reason"].get<std::string>();
    if (c.contains("coefficient")) out << " (coefficient " << c["coefficient"].get<std::string>() << ")";
    out << "\n";
  }
}

void set_details(std::ostringstream& out, const json& s) {
  if (s.contains("declared_as")) out << "      declared as " << join(s["declared_as"]) << "\n";
  candidate_details(out, s);
  for (const auto& v : s["invariance"]) {
    out << "      invariance at level " << v["level"].dump() << ": " << v["verdict"].get<std::string>() << " ("
        << v["trials"].dump() << " trials, max |rho| = " << v["max_abs"].dump() << ", worst |rho|/tol = "
        << v["worst_ratio"].dump() << ", stopped " << v["stopped_trials"].dump() << ")\n";
  }
  if (!s["controllability"].is_null()) {
    const auto& c = s["controllability"];
    out << "      on-leaf bracket rank " << c["rank"].dump() << " / leaf dimension " << c["leaf_dimension"].dump()
        << (c["tangent"].get<bool>() ? "" : ", brackets not tangent") << ": "
        << (c["controllable"].get<bool>() ? "controllable" : "not shown controllable") << "\n";
  }
}

}  // namespace

std::string render_text(const json& j) {
  std::ostringstream out;
  const auto& s = j["system"];
  out << "system: " << s["states"].size() << " states (" << join(s["states"]) << "), " << s["controls"].size()
      << " controls, " << (s["drift"].is_null() ? "no drift" : "drift [" + join(s["drift"]) + "]") << "\n";
  out << "seed: " << j["seed"].dump() << "\n";
  if (!j["flag"].is_null()) {
    const auto& f = j["flag"];
    out << "derived flag: type " << pair_text(f["type"]) << ", distribution type " << pair_text(f["distribution_type"])
        << ", numeric distribution type " << pair_text(j["numeric_distribution_type"]) << "\n";
    for (std::size_t i = 0; i < f["levels"].size(); ++i) {
      const auto& l = f["levels"][i];
      out << "  I(" << i << "): rank " << l["rank"].dump();
      if (!l["generators"].empty()) out << ": " << join(l["generators"], "; ");
      out << "\n";
      if (!l["pivots"].empty()) out << "    pivots " << join(l["pivots"]) << "\n";
      const auto& t = l["torsion"];
      if (!t["columns"].empty()) {
        out << "    torsion on " << join(t["columns"]) << ":";
        for (const auto& row : t["entries"]) out << " [" << join(row) << "]";
        out << "\n";
      }
    }
  }
  out << "candidates: " << (j["candidates"].empty() ? "none" : join(j["candidates"])) << "\n";
  out << "foliation:" << (j["foliation"].empty() ? " none" : "") << "\n";
  for (const auto& f : j["foliation"]) {
    out << "  " << rho_text(f) << " = c (leaf dimension " << f["leaf_dimension"].dump() << ")\n";
    set_details(out, f);
  }
  out << "isolated:" << (j["isolated"].empty() ? " none" : "") << "\n";
  for (const auto& f : j["isolated"]) {
    out << "  " << rho_text(f) << " = 0 [" << f["provenance"].get<std::string>() << "]\n";
    set_details(out, f);
  }
  out << "rejected:" << (j["rejected"].empty() ? " none" : "") << "\n";
  for (const auto& r : j["rejected"]) {
    out << "  " << rho_text(r) << " [" << r["provenance"].get<std::string>() << "]\n";
    if (r.contains("declared_as")) out << "      declared as " << join(r["declared_as"]) << "\n";
    candidate_details(out, r);
    if (!r["escape"].is_null()) {
      const auto& e = r["escape"];
      out << "      escapes: u = (" << join(e["control"]) << ") reaches |rho| = " << e["value"].dump() << " at t = "
          << e["time"].dump() << "\n";
    }
  }
  if (!j["undetermined"].empty()) {
    out << "undetermined:\n";
    for (const auto& u : j["undetermined"]) {
      out << "  " << (u.contains("rho") && !u["rho"].is_null() ? rho_text(u) : std::string("(no integral)")) << "\n";
      candidate_details(out, u);
    }
  }
  if (!j["constraints"].empty()) out << "domain constraints (nonzero): " << join(j["constraints"]) << "\n";
  for (const auto& e : j["errors"]) {
    out << "error in " << e["stage"].get<std::string>() << " (" << e["module"].get<std::string>()
        << "): " << e["kind"].get<std::string>() << ": " << e["message"].get<std::string>() << "\n";
  }
  out << "conclusion: " << j["conclusion"].get<std::string>() << "\n";
  return out.str();
}

}  // namespace pfaffian
