#include "pfaffian/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pfaffian/error.hpp"
#include "pfaffian/integrals.hpp"
#include "pfaffian/linalg.hpp"

namespace pfaffian {

namespace {

constexpr const char* kModule = "numeric-verifier";

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

// ----------------------------------------------------------- compiled Expr

CompiledExpr::CompiledExpr(const Expr& e)
    : num_(compile(e.numerator())), den_(compile(e.denominator())), polynomial_(e.is_polynomial()) {}

std::vector<CompiledExpr::Term> CompiledExpr::compile(const Poly& p) {
  std::vector<Term> out;
  for (const auto& [m, c] : p.terms()) {
    Term t{c.get_d(), {}};
    for (const auto& [v, e] : m.powers()) t.powers.emplace_back(symbol_of(v) * 3 + static_cast<std::uint32_t>(kind_of(v)), e);
    out.push_back(std::move(t));
  }
  return out;
}

double CompiledExpr::eval(const std::vector<Term>& terms, const std::vector<double>& atoms) {
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.coefficient;
    for (const auto& [slot, e] : t.powers) {
      const double a = atoms[slot];
      v *= e == 1 ? a : std::pow(a, static_cast<double>(e));
    }
    acc += v;
  }
  return acc;
}

double CompiledExpr::operator()(const std::vector<double>& atoms) const {
  const double n = eval(num_, atoms);
  if (polynomial_) return n / den_.front().coefficient;
  const double d = eval(den_, atoms);
  if (std::abs(d) < 1e-12) throw Error(ErrorKind::EvalSingular, "symbolic-kernel", "denominator vanishes");
  return n / d;
}

void fill_atoms(const std::vector<double>& values, std::vector<double>& atoms) {
  atoms.resize(values.size() * 3);
  for (std::size_t s = 0; s < values.size(); ++s) {
    atoms[3 * s] = values[s];
    atoms[3 * s + 1] = std::cos(values[s]);
    atoms[3 * s + 2] = std::sin(values[s]);
  }
}

// ----------------------------------------------------------- numeric system

NumericSystem::NumericSystem(const ControlAffineSystem& sys, const Domain& domain, const Assignment& point)
    : n_(sys.n()), m_(sys.m()), values_(sys.symbols.size(), 0.0) {
  for (SymbolId s = static_cast<SymbolId>(n_); s < sys.symbols.size(); ++s) {
    auto it = point.find(s);
    if (it == point.end()) {
      throw Error(ErrorKind::UnknownSymbol, kModule, "no value for parameter " + sys.symbols.name(s));
    }
    values_[s] = it->second;
  }
  for (const auto& c : sys.drift) drift_.emplace_back(c);
  for (const auto& g : sys.controls) {
    std::vector<CompiledExpr> cg;
    for (const auto& c : g) cg.emplace_back(c);
    controls_.push_back(std::move(cg));
  }
  for (const auto& c : domain.nonzero()) constraints_.emplace_back(c);
}

std::vector<double> NumericSystem::atoms(const std::vector<double>& x) const {
  std::vector<double> values = values_;
  std::copy(x.begin(), x.end(), values.begin());
  std::vector<double> a;
  fill_atoms(values, a);
  return a;
}

std::vector<double> NumericSystem::velocity(const std::vector<double>& x, const std::vector<double>& u) const {
  const auto a = atoms(x);
  std::vector<double> v(n_, 0.0);
  try {
    for (std::size_t i = 0; i < n_; ++i) {
      double vi = drift_[i](a);
      for (std::size_t j = 0; j < m_; ++j) {
        if (u[j] != 0.0) vi += controls_[j][i](a) * u[j];
      }
      v[i] = vi;
    }
  } catch (const Error& e) {
    throw Error(ErrorKind::StepSingular, kModule, std::string("vector field is singular: ") + e.what());
  }
  for (double vi : v) {
    if (!std::isfinite(vi)) throw Error(ErrorKind::StepSingular, kModule, "vector field is not finite");
  }
  return v;
}

std::vector<int> NumericSystem::constraint_signs(const std::vector<double>& x) const {
  const auto a = atoms(x);
  std::vector<int> signs;
  for (const auto& c : constraints_) signs.push_back(c(a) > 0 ? 1 : -1);
  return signs;
}

void NumericSystem::check_domain(const std::vector<double>& x, const std::vector<int>& reference_signs) const {
  const auto a = atoms(x);
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    double v = 0.0;
    try {
      v = constraints_[i](a);
    } catch (const Error&) {
      throw Error(ErrorKind::DomainExit, kModule, "constraint is singular along the trajectory");
    }
    if (std::abs(v) <= kDomainMargin || (v > 0 ? 1 : -1) != reference_signs[i]) {
      throw Error(ErrorKind::DomainExit, kModule, "trajectory reaches the zero set of a nonzero constraint");
    }
  }
}

double NumericSystem::monitor(const CompiledExpr& e, const std::vector<double>& x) const { return e(atoms(x)); }

// ----------------------------------------------------------- simulation

namespace {

Trajectory run(const ControlAffineSystem& sys, const Domain& domain, const Assignment& x0,
               const ControlSchedule& sched, double h, const std::vector<Expr>& monitored, double escape,
               std::optional<Error>& failure) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "step h must be positive");
  if (!domain.satisfies(x0, kDomainMargin)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "initial point violates a domain constraint");
  }
  const NumericSystem ns(sys, domain, x0);
  const std::size_t n = ns.n(), m = ns.m();
  std::vector<CompiledExpr> rho;
  for (const auto& r : monitored) rho.emplace_back(r);

  Trajectory tr;
  tr.h = h;
  tr.schedule = sched;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = x0.find(static_cast<SymbolId>(i));
    if (it == x0.end()) throw Error(ErrorKind::UnknownSymbol, kModule, "initial point misses a state");
    x[i] = it->second;
  }
  const auto signs = ns.constraint_signs(x);
  bool escaped = false;
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.x.push_back(x);
    std::vector<double> r;
    for (const auto& e : rho) {
      r.push_back(ns.monitor(e, x));
      if (escape > 0.0 && std::abs(r.back()) > escape) escaped = true;
    }
    tr.rho.push_back(std::move(r));
  };
  try {
    record(0.0);
  } catch (const Error& e) {
    failure = e;
    tr.stopped = e.what();
    tr.u.push_back(std::vector<double>(m, 0.0));
    return tr;
  }

  std::int64_t step_index = 0;
  std::vector<double> last_u(m, 0.0);
  for (const auto& piece : sched.pieces) {
    const auto steps = static_cast<std::int64_t>(std::llround(piece.duration / h));
    const std::vector<double>& u = piece.value;
    last_u = u;
    for (std::int64_t k = 0; k < steps; ++k) {
      tr.u.push_back(u);
      try {
        const auto k1 = ns.velocity(x, u);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        const auto k2 = ns.velocity(y, u);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        const auto k3 = ns.velocity(y, u);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
        const auto k4 = ns.velocity(y, u);
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) next[i] = x[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        ns.check_domain(next, signs);
        std::vector<double> dx(n);
        for (std::size_t i = 0; i < n; ++i) dx[i] = next[i] - x[i];
        tr.arc_length += norm(dx);
        x = std::move(next);
        ++step_index;
        record(static_cast<double>(step_index) * h);
      } catch (const Error& e) {
        failure = e;
        tr.stopped = e.what();
        tr.u.push_back(u);
        return tr;
      }
      if (escaped) {
        tr.u.push_back(u);
        return tr;
      }
    }
  }
  tr.u.push_back(last_u);
  return tr;
}

}  // namespace

Trajectory simulate(const ControlAffineSystem& sys, const Domain& domain, const Assignment& x0,
                    const ControlSchedule& sched, double h, const std::vector<Expr>& monitored) {
  std::optional<Error> failure;
  Trajectory tr = run(sys, domain, x0, sched, h, monitored, 0.0, failure);
  if (failure) throw *failure;
  return tr;
}

Trajectory simulate_until(const ControlAffineSystem& sys, const Domain& domain, const Assignment& x0,
                          const ControlSchedule& sched, double h, const std::vector<Expr>& monitored,
                          double escape) {
  std::optional<Error> failure;
  return run(sys, domain, x0, sched, h, monitored, escape, failure);
}

std::string Trajectory::to_csv(const ControlAffineSystem& sys) const {
  std::ostringstream out;
  out << "t";
  for (const auto& s : sys.symbols.states()) out << "," << s;
  for (std::size_t j = 0; j < sys.m(); ++j) out << ",u" << j + 1;
  const std::size_t d = rho.empty() ? 0 : rho.front().size();
  for (std::size_t k = 0; k < d; ++k) out << ",rho" << k + 1;
  out << "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << format_double(t[i]);
    for (double v : x[i]) out << "," << format_double(v);
    for (std::size_t j = 0; j < sys.m(); ++j) out << "," << format_double(i < u.size() ? u[i][j] : 0.0);
    for (double v : rho[i]) out << "," << format_double(v);
    out << "\n";
  }
  return out.str();
}

// ----------------------------------------------------------- invariance

const char* to_string(InvarianceStatus s) { return s == InvarianceStatus::Held ? "Held" : "Violated"; }

namespace {

ControlSchedule random_schedule(Rng& rng, std::size_t m, int pieces, double horizon, double h) {
  ControlSchedule sched;
  std::vector<double> weights;
  double total = 0.0;
  for (int k = 0; k < pieces; ++k) {
    weights.push_back(rng.uniform(0.5, 1.5));
    total += weights.back();
  }
  // Piece boundaries snapped onto the grid.
  const auto steps = static_cast<std::int64_t>(std::llround(horizon / h));
  std::int64_t done = 0;
  double cum = 0.0;
  for (int k = 0; k < pieces; ++k) {
    cum += weights[static_cast<std::size_t>(k)];
    const std::int64_t end = k + 1 == pieces ? steps : static_cast<std::int64_t>(std::llround(cum / total * steps));
    ControlPiece piece;
    piece.duration = static_cast<double>(end - done) * h;
    for (std::size_t j = 0; j < m; ++j) piece.value.push_back(rng.uniform(-1.0, 1.0));
    sched.pieces.push_back(std::move(piece));
    done = end;
  }
  return sched;
}

double max_abs_rho(const Trajectory& tr) {
  double mx = 0.0;
  for (const auto& r : tr.rho) {
    for (double v : r) mx = std::max(mx, std::abs(v));
  }
  return mx;
}

}  // namespace

InvarianceVerdict invariance_test(const ControlAffineSystem& sys, const Domain& domain, const std::vector<Expr>& rho,
                                  int trials, int pieces, double horizon, double h, std::uint64_t seed) {
  InvarianceVerdict verdict;
  verdict.seed = seed;
  const ZeroLocusSampler sampler(rho, domain, sys.n());
  for (int i = 0; i < trials; ++i) {
    InvarianceTrial trial;
    trial.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(trial.seed);
    const auto x0 = sampler.sample(rng);
    if (!x0) {
      trial.stopped = "no start point on the zero locus";
      ++verdict.stopped_trials;
      verdict.trials.push_back(std::move(trial));
      continue;
    }
    const auto sched = random_schedule(rng, sys.m(), pieces, horizon, h);
    const Trajectory tr = simulate_until(sys, domain, *x0, sched, h, rho);
    trial.max_abs = max_abs_rho(tr);
    trial.arc_length = tr.arc_length;
    trial.tolerance = kInvarianceScale * (1.0 + tr.arc_length);
    trial.stopped = tr.stopped;
    if (tr.stopped) ++verdict.stopped_trials;
    verdict.max_abs = std::max(verdict.max_abs, trial.max_abs);
    if (trial.max_abs > trial.tolerance) verdict.verdict = InvarianceStatus::Violated;
    verdict.trials.push_back(std::move(trial));
  }
  return verdict;
}

std::optional<Escape> escape_test(const ControlAffineSystem& sys, const Domain& domain, const std::vector<Expr>& rho,
                                  std::uint64_t seed, double h) {
  const std::size_t m = sys.m();
  std::vector<std::vector<double>> controls;
  controls.emplace_back(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> u(m, 0.0);
      u[j] = sign;
      controls.push_back(std::move(u));
    }
  }
  Rng rng(seed);
  for (int k = 0; k < kEscapeRandomControls; ++k) {
    std::vector<double> u;
    for (std::size_t j = 0; j < m; ++j) u.push_back(rng.uniform(-1.0, 1.0));
    controls.push_back(std::move(u));
  }
  const ZeroLocusSampler sampler(rho, domain, sys.n());
  for (int start = 0; start < kEscapeStarts; ++start) {
    const auto x0 = sampler.sample(rng);
    if (!x0) continue;
    for (const auto& u : controls) {
      ControlSchedule sched;
      sched.pieces.push_back({kEscapeHorizon, u});
      const Trajectory tr = simulate_until(sys, domain, *x0, sched, h, rho, kEscapeThreshold);
      for (std::size_t i = 0; i < tr.rho.size(); ++i) {
        for (double v : tr.rho[i]) {
          if (std::abs(v) > kEscapeThreshold) return Escape{*x0, sched, tr.t[i], v};
        }
      }
    }
  }
  return std::nullopt;
}

// ----------------------------------------------------------- brackets

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  const std::size_t n = X.size();
  if (Y.size() != n) throw Error(ErrorKind::InvalidArgument, kModule, "bracket of fields of different sizes");
  VectorField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Expr acc;
    for (SymbolId k = 0; k < n; ++k) {
      if (!X[k].is_zero()) acc += X[k] * differentiate(Y[i], k);
      if (!Y[k].is_zero()) acc -= Y[k] * differentiate(X[i], k);
    }
    out[i] = acc;
  }
  return out;
}

namespace {

bool is_zero_field(const VectorField& v) {
  return std::all_of(v.begin(), v.end(), [](const Expr& e) { return e.is_zero(); });
}

Eigen::MatrixXd columns_at(const std::vector<VectorField>& vs, const Assignment& p) {
  const std::size_t n = vs.empty() ? 0 : vs.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = evaluate(vs[j][i], p);
    }
  }
  return m;
}

BracketRank bracket_rank_to(const std::vector<VectorField>& fields, const std::vector<std::string>& names,
                            const Assignment& p, std::size_t depth, std::size_t target) {
  if (depth == 0) throw Error(ErrorKind::InvalidArgument, kModule, "bracket depth must be at least 1");
  BracketRank out;
  std::vector<VectorField> level;
  std::vector<std::string> level_names;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (is_zero_field(fields[i])) continue;
    level.push_back(fields[i]);
    level_names.push_back(names[i]);
  }
  for (std::size_t k = 1; k <= depth; ++k) {
    out.vectors.insert(out.vectors.end(), level.begin(), level.end());
    out.labels.insert(out.labels.end(), level_names.begin(), level_names.end());
    out.rank = out.vectors.empty() ? 0 : numeric_rank(columns_at(out.vectors, p), kBracketThreshold);
    out.depth = k;
    if (out.rank >= target || k == depth) break;
    std::vector<VectorField> next;
    std::vector<std::string> next_names;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      for (std::size_t j = 0; j < level.size(); ++j) {
        VectorField b = lie_bracket(fields[i], level[j]);
        if (is_zero_field(b)) continue;
        next.push_back(std::move(b));
        next_names.push_back("[" + names[i] + "," + level_names[j] + "]");
      }
    }
    if (next.empty()) break;
    level = std::move(next);
    level_names = std::move(next_names);
  }
  return out;
}

}  // namespace

BracketRank bracket_rank(const std::vector<VectorField>& fields, const std::vector<std::string>& names,
                         const Assignment& p, std::size_t depth) {
  const std::size_t n = fields.empty() ? 0 : fields.front().size();
  return bracket_rank_to(fields, names, p, depth, n);
}

LeafControllability leaf_controllability(const ControlAffineSystem& sys, const std::vector<Expr>& rho,
                                         const Assignment& p, std::size_t depth) {
  LeafControllability out;
  out.point = p;
  out.leaf_dimension = sys.n() - rho.size();
  const BracketRank br = bracket_rank_to(sys.controls, sys.control_names, p, depth, out.leaf_dimension);
  out.rank = br.rank;
  for (const auto& r : rho) {
    std::vector<double> grad;
    for (SymbolId s = 0; s < sys.n(); ++s) grad.push_back(evaluate(differentiate(r, s), p));
    for (const auto& v : br.vectors) {
      double dot = 0.0, size = 0.0;
      for (std::size_t i = 0; i < sys.n(); ++i) {
        const double vi = evaluate(v[i], p);
        dot += grad[i] * vi;
        size += vi * vi;
      }
      if (std::abs(dot) > kBracketThreshold * (1.0 + std::sqrt(size))) out.tangent = false;
    }
  }
  out.controllable = out.tangent && out.rank >= out.leaf_dimension;
  return out;
}

Assignment generic_point(const Domain& domain, Rng& rng) {
  const SymbolTable& t = domain.symbols();
  Assignment p;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    p.clear();
    for (SymbolId s = 0; s < t.size(); ++s) {
      if (t.is_state(s)) {
        p[s] = rng.uniform(-2.0, 2.0);
        continue;
      }
      const double mag = rng.uniform(0.5, 2.0);
      switch (t.sign(s)) {
        case ParamSign::Positive: p[s] = mag; break;
        case ParamSign::Negative: p[s] = -mag; break;
        case ParamSign::Nonzero: p[s] = rng.uniform() < 0.5 ? -mag : mag; break;
        case ParamSign::Any: p[s] = rng.uniform(-2.0, 2.0); break;
      }
    }
    if (domain.satisfies(p)) return p;
  }
  return p;
}

std::pair<std::size_t, std::size_t> numeric_distribution_type(const ControlAffineSystem& sys, const Assignment& p,
                                                             std::size_t max_steps) {
  std::vector<VectorField> basis;
  std::size_t rank = 0;
  auto offer = [&](const VectorField& v) {
    if (is_zero_field(v)) return;
    basis.push_back(v);
    const std::size_t r = numeric_rank(columns_at(basis, p), kBracketThreshold);
    if (r > rank) {
      rank = r;
    } else {
      basis.pop_back();
    }
  };
  if (sys.has_drift()) offer(sys.drift);
  for (const auto& g : sys.controls) offer(g);
  std::size_t nu = 0;
  for (std::size_t step = 0; step < max_steps && rank < sys.n(); ++step) {
    const std::size_t before = rank;
    const auto current = basis;
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = i + 1; j < current.size(); ++j) offer(lie_bracket(current[i], current[j]));
    }
    if (rank == before) break;
    ++nu;
  }
  return {nu, rank};
}

}  // namespace pfaffian
