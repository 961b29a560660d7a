#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pfaffian/error.hpp"
#include "pfaffian/flag.hpp"
#include "pfaffian/integrals.hpp"
#include "pfaffian/numeric.hpp"
#include "pfaffian/report.hpp"

namespace pfaffian::cli {

using nlohmann::json;

namespace {

struct Options {
  std::string path;
  std::uint64_t seed = 42;
  int trials = 100;
  double horizon = 5.0;
  double step = 1e-3;
  std::size_t dmax = 3;
  std::string format = "json";
  std::string output;
  // verify
  std::string rho;
  // simulate
  std::string x0;
  std::vector<std::string> params;
  std::string schedule;
  int pieces = 10;
  std::vector<std::string> monitors;
  // brackets
  std::string at;
  std::size_t depth = kDefaultBracketDepth;
};

// Failure outside the library (bad input file, malformed option value).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Library error tagged with the pipeline stage that raised it.
struct StageFailure {
  std::string stage;
  Error error;
};

template <typename F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageFailure{name, e};
  }
}

std::string diagnostic(const std::string& module, const std::string& stage_name, const std::string& kind,
                       const std::string& message) {
  return "error [" + module + "/" + stage_name + "] " + kind + ": " + message;
}

std::string read_input(const Options& o, std::istream& in) {
  std::ostringstream ss;
  if (o.path.empty() || o.path == "-") {
    ss << in.rdbuf();
    return ss.str();
  }
  std::ifstream f(o.path);
  if (!f) throw UsageError("cannot read system file '" + o.path + "'");
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (s.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid number '" + s + "' in " + what);
  }
}

std::vector<double> numbers(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const auto& part : split(s, ',')) v.push_back(number(part, what));
  return v;
}

std::vector<Expr> parse_functions(const std::string& text, const ControlAffineSystem& sys) {
  std::vector<Expr> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_expr(part, sys.symbols));
  if (out.empty()) throw UsageError("empty candidate");
  return out;
}

// "name=value,..." over any symbols; missing symbols come from `base`.
Assignment assignment(const std::string& text, const ControlAffineSystem& sys, Assignment base) {
  if (text.empty()) return base;
  for (const auto& part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw UsageError("expected name=value, got '" + part + "'");
    const auto id = sys.symbols.find(part.substr(0, eq));
    if (!id) throw UsageError("unknown symbol '" + part.substr(0, eq) + "'");
    base[*id] = number(part.substr(eq + 1), "--at");
  }
  return base;
}

json base_json(const Options& o) { return json{{"schema", kReportSchema}, {"seed", o.seed}}; }

// Generic text rendering of a JSON document: nothing beyond its content.
void render_plain(std::ostringstream& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  auto flat = [&](const json& v) {
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (e.is_structured()) return false;
    }
    return true;
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_structured() && !flat(v)) {
        out << pad << k << ":\n";
        render_plain(out, v, indent + 1);
      } else if (v.is_array()) {
        out << pad << k << ": [";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << scalar(v[i]);
        out << "]\n";
      } else {
        out << pad << k << ": " << scalar(v) << "\n";
      }
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out << pad << "- [" << i << "]\n";
      render_plain(out, j[i], indent + 1);
    }
  } else {
    out << pad << scalar(j) << "\n";
  }
}

std::string render(const json& j, const Options& o) {
  if (o.format == "json") return j.dump(2) + "\n";
  std::ostringstream out;
  render_plain(out, j, 0);
  return out.str();
}

void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + o.output + "'");
  f << text;
}

AnalysisConfig config(const Options& o) {
  AnalysisConfig c;
  c.seed = o.seed;
  c.trials = o.trials;
  c.horizon = o.horizon;
  c.step = o.step;
  c.dmax = o.dmax;
  return c;
}

// ------------------------------------------------------------ subcommands

int cmd_analyze(const ControlAffineSystem& sys, const Options& o, std::ostream& out, std::ostream& err) {
  const auto report = analyze(sys, config(o));
  const json j = to_json(report);
  emit(o.format == "json" ? j.dump(2) + "\n" : render_text(j), o, out);
  for (const auto& e : report.errors) err << diagnostic(e.module, e.stage, e.kind, e.message) << "\n";
  return report.errors.empty() ? kExitOk : kExitAnalysis;
}

int cmd_flag(const ControlAffineSystem& sys, const Options& o, std::ostream& out) {
  const auto flag = stage("flag", [&] { return derived_flag(sys, o.seed); });
  json j = base_json(o);
  j["flag"] = flag_to_json(flag, sys);
  j["constraints"] = json::array();
  for (const auto& c : flag.domain.nonzero()) j["constraints"].push_back(c.to_string(sys.symbols));
  emit(render(j, o), o, out);
  return kExitOk;
}

int cmd_torsion(const ControlAffineSystem& sys, const Options& o, std::ostream& out) {
  // Same seeds as level 0 of the derived flag.
  Domain domain = sys.domain();
  PfaffianSystem theta = stage("annihilator", [&] { return annihilator(sys, domain, derive_seed(o.seed, 100)); });
  const std::uint64_t level_seed = derive_seed(o.seed, 1000);
  json j = base_json(o);
  j["generators"] = json::array();
  for (const auto& g : theta.generators) j["generators"].push_back(g.to_string(sys.symbols));
  if (theta.rank() == 0) {
    j["torsion"] = nullptr;
  } else {
    stage("coframe", [&] { return complete_coframe(theta, domain, derive_seed(level_seed, 2)); });
    const auto T = stage("torsion", [&] { return torsion(theta, domain, derive_seed(level_seed, 3)); });
    j["pivots"] = json::array();
    for (std::size_t p : theta.pivots) j["pivots"].push_back("d" + sys.symbols.name(static_cast<SymbolId>(p)));
    j["torsion"] = torsion_to_json(T, sys);
    j["zero"] = T.is_zero();
  }
  j["constraints"] = json::array();
  for (const auto& c : domain.nonzero()) j["constraints"].push_back(c.to_string(sys.symbols));
  emit(render(j, o), o, out);
  return kExitOk;
}

int cmd_candidates(const ControlAffineSystem& sys, const Options& o, std::ostream& out) {
  const auto flag = stage("flag", [&] { return derived_flag(sys, o.seed); });
  const auto& level0 = flag.levels.front();
  std::vector<Expr> cands;
  if (level0.system.rank() > 0 && !level0.torsion.is_zero()) {
    cands = stage("candidates", [&] {
      return gfi_candidates(level0.torsion, level0.system.rank(), o.dmax, flag.domain, sys.n(),
                            derive_seed(o.seed, 11));
    });
  }
  json j = base_json(o);
  j["torsion"] = torsion_to_json(level0.torsion, sys);
  j["candidates"] = json::array();
  for (const auto& c : cands) j["candidates"].push_back(c.to_string(sys.symbols));
  emit(render(j, o), o, out);
  return kExitOk;
}

int cmd_verify(const ControlAffineSystem& sys, const Options& o, std::ostream& out) {
  const auto rho = stage("candidate", [&] { return parse_functions(o.rho, sys); });
  const auto flag = stage("flag", [&] { return derived_flag(sys, o.seed); });
  auto c = stage("membership", [&] {
    return check_membership(rho, flag.levels.front().system, sys, flag.domain, derive_seed(o.seed, 20));
  });
  c.provenance = Provenance::UserDeclared;
  json j = base_json(o);
  j["candidate"] = candidate_to_json(c, sys);
  const Domain declared = sys.domain();
  if (c.classification == Classification::Rejected) {
    const auto e = stage("escape", [&] { return escape_test(sys, declared, rho, derive_seed(o.seed, 700)); });
    j["escape"] = e ? escape_to_json(*e, sys) : json(nullptr);
  } else {
    const auto v = stage("invariance", [&] {
      return invariance_test(sys, declared, rho, o.trials, 10, o.horizon, o.step, derive_seed(o.seed, 500));
    });
    j["invariance"] = invariance_to_json(v);
  }
  emit(render(j, o), o, out);
  return kExitOk;
}

ControlSchedule parse_schedule(const std::string& text, std::size_t m) {
  ControlSchedule s;
  for (const auto& piece : split(text, ';')) {
    const auto colon = piece.find(':');
    if (colon == std::string::npos) throw UsageError("schedule piece '" + piece + "' is not duration:u1,...,um");
    ControlPiece p{number(piece.substr(0, colon), "--schedule"), numbers(piece.substr(colon + 1), "--schedule")};
    if (p.duration < 0 || p.value.size() != m) {
      throw UsageError("schedule piece '" + piece + "' needs a duration >= 0 and " + std::to_string(m) + " values");
    }
    s.pieces.push_back(std::move(p));
  }
  return s;
}

ControlSchedule random_schedule(std::size_t m, int pieces, double horizon, Rng& rng) {
  ControlSchedule s;
  for (int i = 0; i < pieces; ++i) {
    ControlPiece p{horizon / pieces, {}};
    for (std::size_t j = 0; j < m; ++j) p.value.push_back(rng.uniform(-1.0, 1.0));
    s.pieces.push_back(std::move(p));
  }
  return s;
}

int cmd_simulate(const ControlAffineSystem& sys, const Options& o, std::ostream& out, std::ostream& err) {
  const Domain domain = sys.domain();
  Rng rng(o.seed);
  Assignment x0 = generic_point(domain, rng);
  if (!o.x0.empty()) {
    const auto v = numbers(o.x0, "--x0");
    if (v.size() != sys.n()) throw UsageError("--x0 needs " + std::to_string(sys.n()) + " state values");
    for (SymbolId s = 0; s < v.size(); ++s) x0[s] = v[s];
  }
  for (const auto& p : o.params) x0 = assignment(p, sys, x0);
  const auto sched = o.schedule.empty() ? random_schedule(sys.m(), o.pieces, o.horizon, rng)
                                        : parse_schedule(o.schedule, sys.m());
  std::vector<Expr> monitored = sys.candidates;
  for (const auto& m : o.monitors) {
    const auto fs = stage("monitor", [&] { return parse_functions(m, sys); });
    monitored.insert(monitored.end(), fs.begin(), fs.end());
  }
  const auto tr = stage("simulate", [&] { return simulate_until(sys, domain, x0, sched, o.step, monitored); });
  emit(tr.to_csv(sys), o, out);
  if (tr.stopped) {
    err << diagnostic("numeric-verifier", "simulate", "stopped", *tr.stopped) << "\n";
    return kExitAnalysis;
  }
  return kExitOk;
}

int cmd_brackets(const ControlAffineSystem& sys, const Options& o, std::ostream& out) {
  Rng rng(o.seed);
  const Assignment p = assignment(o.at, sys, generic_point(sys.domain(), rng));
  std::vector<VectorField> fields;
  std::vector<std::string> names;
  if (sys.has_drift()) {
    fields.push_back(sys.drift);
    names.push_back("f");
  }
  fields.insert(fields.end(), sys.controls.begin(), sys.controls.end());
  names.insert(names.end(), sys.control_names.begin(), sys.control_names.end());
  json j = base_json(o);
  j["table"] = json::array();
  for (std::size_t a = 0; a < fields.size(); ++a) {
    for (std::size_t b = a + 1; b < fields.size(); ++b) {
      json comps = json::array();
      for (const auto& e : lie_bracket(fields[a], fields[b])) comps.push_back(e.to_string(sys.symbols));
      j["table"].push_back({{"bracket", "[" + names[a] + "," + names[b] + "]"}, {"components", comps}});
    }
  }
  json point = json::object();
  for (const auto& [s, v] : p) point[sys.symbols.name(s)] = v;
  j["point"] = point;
  auto rank_json = [&](const std::vector<VectorField>& fs, const std::vector<std::string>& ns) {
    const auto r = stage("brackets", [&] { return bracket_rank(fs, ns, p, o.depth); });
    return json{{"rank", r.rank}, {"depth", r.depth}, {"spanning", r.labels}};
  };
  j["controls"] = rank_json(sys.controls, sys.control_names);
  if (sys.has_drift()) j["all_fields"] = rank_json(fields, names);
  j["n"] = sys.n();
  emit(render(j, o), o, out);
  return kExitOk;
}

void common_options(CLI::App* sub, Options& o, bool with_numeric) {
  sub->add_option("system", o.path, "system file (stdin when omitted or '-')");
  sub->add_option("--seed", o.seed, "master seed");
  if (with_numeric) {
    sub->add_option("--trials", o.trials, "invariance trials")->check(CLI::PositiveNumber);
    sub->add_option("--horizon", o.horizon, "simulation horizon")->check(CLI::PositiveNumber);
    sub->add_option("--step", o.step, "RK4 step")->check(CLI::PositiveNumber);
  }
  sub->add_option("--dmax", o.dmax, "maximum candidate degree")->check(CLI::PositiveNumber);
  sub->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  sub->add_option("--output", o.output, "write to a file instead of stdout");
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invariant submanifolds of affine control systems"};
  app.require_subcommand(1);
  Options o;
  auto* analyze_cmd = app.add_subcommand("analyze", "full pipeline: flag, integrals, candidates, numeric evidence");
  auto* flag_cmd = app.add_subcommand("flag", "derived flag only");
  auto* torsion_cmd = app.add_subcommand("torsion", "torsion matrix of the annihilator");
  auto* candidates_cmd = app.add_subcommand("candidates", "torsion-minor candidates without verification");
  auto* verify_cmd = app.add_subcommand("verify", "membership and numeric test of a candidate");
  auto* simulate_cmd = app.add_subcommand("simulate", "trajectory CSV");
  auto* brackets_cmd = app.add_subcommand("brackets", "bracket table and ranks");
  verify_cmd->add_option("rho", o.rho, "candidate function(s), comma-separated")->required();
  for (auto* sub : {analyze_cmd, flag_cmd, torsion_cmd, candidates_cmd, verify_cmd, simulate_cmd, brackets_cmd}) {
    common_options(sub, o, sub == analyze_cmd || sub == verify_cmd || sub == simulate_cmd);
  }
  simulate_cmd->add_option("--x0", o.x0, "initial state values, comma-separated");
  simulate_cmd->add_option("--param", o.params, "parameter values name=value[,...]");
  simulate_cmd->add_option("--schedule", o.schedule, "pieces 'duration:u1,..,um;...'");
  simulate_cmd->add_option("--pieces", o.pieces, "random pieces when no schedule is given")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--monitor", o.monitors, "functions to record as rho columns");
  brackets_cmd->add_option("--at", o.at, "point name=value[,...] (generic otherwise)");
  brackets_cmd->add_option("--depth", o.depth, "bracket depth")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << diagnostic("cli", "arguments", "UsageError", e.what()) << "\n";
    return kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const std::string text = read_input(o, in);
    const auto sys = stage("parse", [&] { return parse_system(text); });
    if (name == "analyze") return cmd_analyze(sys, o, out, err);
    if (name == "flag") return cmd_flag(sys, o, out);
    if (name == "torsion") return cmd_torsion(sys, o, out);
    if (name == "candidates") return cmd_candidates(sys, o, out);
    if (name == "verify") return cmd_verify(sys, o, out);
    if (name == "simulate") return cmd_simulate(sys, o, out, err);
    return cmd_brackets(sys, o, out);
  } catch (const UsageError& e) {
    err << diagnostic("cli", name, "UsageError", e.what()) << "\n";
    return kExitUsage;
  } catch (const StageFailure& f) {
    err << diagnostic(f.error.module(), name + "/" + f.stage, to_string(f.error.kind()), f.error.message()) << "\n";
    return kExitAnalysis;
  } catch (const Error& e) {
    err << diagnostic(e.module(), name, to_string(e.kind()), e.message()) << "\n";
    return kExitAnalysis;
  }
}

}  // namespace pfaffian::cli
