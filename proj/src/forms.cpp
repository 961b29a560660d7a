#include "pfaffian/forms.hpp"

#include <algorithm>

#include "pfaffian/error.hpp"
#include "pfaffian/linalg.hpp"

namespace pfaffian {

namespace {
constexpr const char* kModule = "exterior-calculus";

// Sorts idx in place; returns the permutation sign, or 0 on a repeat.
int sort_with_sign(FormIndex& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}
}  // namespace

DifferentialForm DifferentialForm::scalar(std::size_t n, const Expr& value) {
  DifferentialForm f(n, 0);
  f.add({}, value);
  return f;
}

DifferentialForm DifferentialForm::one_form(const std::vector<Expr>& coefficients) {
  DifferentialForm f(coefficients.size(), 1);
  for (std::size_t i = 0; i < coefficients.size(); ++i) f.add({i}, coefficients[i]);
  return f;
}

DifferentialForm DifferentialForm::coordinate(std::size_t n, std::size_t i) {
  DifferentialForm f(n, 1);
  f.add({i}, Expr(1));
  return f;
}

Expr DifferentialForm::coefficient(const FormIndex& index) const {
  auto it = terms_.find(index);
  return it == terms_.end() ? Expr{} : it->second;
}

void DifferentialForm::add(FormIndex index, const Expr& c) {
  if (c.is_zero()) return;
  const int sign = sort_with_sign(index);
  if (sign == 0) return;
  auto it = terms_.find(index);
  if (it == terms_.end()) {
    terms_.emplace(std::move(index), sign > 0 ? c : -c);
    return;
  }
  it->second = sign > 0 ? it->second + c : it->second - c;
  if (it->second.is_zero()) terms_.erase(it);
}

std::vector<Expr> DifferentialForm::components() const {
  if (degree_ != 1) throw Error(ErrorKind::InvalidArgument, kModule, "components() needs a 1-form");
  std::vector<Expr> out(n_);
  for (const auto& [idx, c] : terms_) out[idx[0]] = c;
  return out;
}

DifferentialForm DifferentialForm::operator-() const {
  DifferentialForm out = *this;
  for (auto& [idx, c] : out.terms_) c = -c;
  return out;
}

DifferentialForm operator+(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.is_zero() && a.degree_ == b.degree_) return b;
  if (a.degree_ != b.degree_ || a.n_ != b.n_) {
    throw Error(ErrorKind::InvalidArgument, kModule, "adding forms of different degree or dimension");
  }
  DifferentialForm out = a;
  for (const auto& [idx, c] : b.terms_) out.add(idx, c);
  return out;
}

DifferentialForm operator-(const DifferentialForm& a, const DifferentialForm& b) { return a + (-b); }

DifferentialForm operator*(const Expr& c, const DifferentialForm& a) {
  DifferentialForm out(a.n_, a.degree_);
  if (c.is_zero()) return out;
  for (const auto& [idx, coeff] : a.terms_) out.terms_.emplace(idx, c * coeff);
  return out;
}

std::string DifferentialForm::to_string(const SymbolTable& symbols) const {
  if (terms_.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [idx, c] : terms_) {
    std::string basis;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) basis += "^";
      basis += "d" + symbols.name(static_cast<SymbolId>(idx[k]));
    }
    const bool negative_term = c.is_polynomial() && c.numerator().size() == 1 && c.numerator().leading_coefficient() < 0;
    const Expr mag = negative_term ? -c : c;
    std::string coeff;
    if (!(mag == Expr(1)) || basis.empty()) {
      coeff = mag.to_string(symbols);
      const bool single = mag.is_polynomial() && mag.numerator().size() == 1;
      if (!single) coeff = "(" + coeff + ")";
    }
    std::string term = coeff;
    if (!basis.empty()) term += (coeff.empty() ? "" : " ") + basis;
    if (first) {
      out += (negative_term ? "-" : "") + term;
    } else {
      out += (negative_term ? " - " : " + ") + term;
    }
    first = false;
  }
  return out;
}

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
  if (a.n() != b.n()) throw Error(ErrorKind::InvalidArgument, kModule, "wedge of forms over different dimensions");
  DifferentialForm out(a.n(), a.degree() + b.degree());
  if (a.degree() + b.degree() > a.n()) return out;
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      FormIndex idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add(std::move(idx), ca * cb);
    }
  }
  return out;
}

DifferentialForm d(const DifferentialForm& a) {
  DifferentialForm out(a.n(), a.degree() + 1);
  if (a.degree() >= a.n()) return out;
  for (const auto& [idx, c] : a.terms()) {
    for (std::size_t i = 0; i < a.n(); ++i) {
      const Expr partial = differentiate(c, static_cast<SymbolId>(i));
      if (partial.is_zero()) continue;
      FormIndex full{i};
      full.insert(full.end(), idx.begin(), idx.end());
      out.add(std::move(full), partial);
    }
  }
  return out;
}

Expr contract(const DifferentialForm& a, const VectorField& X) {
  if (a.degree() != 1) throw Error(ErrorKind::InvalidArgument, kModule, "contract needs a 1-form");
  if (X.size() != a.n()) throw Error(ErrorKind::InvalidArgument, kModule, "vector field has the wrong length");
  Expr total;
  for (const auto& [idx, c] : a.terms()) total += c * X[idx[0]];
  return total;
}

Reducer::Reducer(const std::vector<DifferentialForm>& theta, std::vector<std::size_t> pivots, const Domain& domain,
                 std::uint64_t seed)
    : pivots_(std::move(pivots)) {
  const std::size_t s = theta.size();
  if (s != pivots_.size()) throw Error(ErrorKind::InvalidArgument, kModule, "need one pivot per generator");
  n_ = theta.empty() ? 0 : theta[0].n();
  for (std::size_t i = 0; i < n_; ++i) {
    if (std::find(pivots_.begin(), pivots_.end(), i) == pivots_.end()) free_.push_back(i);
  }
  images_.resize(n_);
  for (std::size_t i : free_) images_[i] = DifferentialForm::coordinate(n_, i);
  if (s == 0) {
    determinant_ = Expr(1);
    return;
  }

  ExprMatrix a(s);
  for (std::size_t l = 0; l < s; ++l) a[l] = theta[l].components();
  ExprMatrix square = submatrix(a, combinations(s, s).front(), pivots_);
  determinant_ = pfaffian::determinant(square);
  if (determinant_.is_zero() || is_zero(determinant_, seed, domain).status != ZeroStatus::ProvenNonzero) {
    throw Error(ErrorKind::SingularPivot, kModule,
                "pivot determinant " + determinant_.to_string(domain.symbols()) + " is not provably nonzero");
  }

  // [A_P | A_F] reduced to [I | A_P^{-1} A_F]; then dx_P = -(A_P^{-1} A_F) dx_F.
  ExprMatrix augmented(s);
  for (std::size_t l = 0; l < s; ++l) {
    for (std::size_t p : pivots_) augmented[l].push_back(a[l][p]);
    for (std::size_t f : free_) augmented[l].push_back(a[l][f]);
  }
  PivotPolicy policy{domain, seed, ErrorKind::SingularPivot, kModule, s};
  RowReduction r = row_reduce(std::move(augmented), policy);
  for (std::size_t row = 0; row < s; ++row) {
    const std::size_t pivot = pivots_[r.pivot_columns[row]];
    DifferentialForm image(n_, 1);
    for (std::size_t k = 0; k < free_.size(); ++k) image.add({free_[k]}, -r.reduced[row][s + k]);
    images_[pivot] = std::move(image);
  }
}

DifferentialForm Reducer::reduce(const DifferentialForm& a) const {
  DifferentialForm out(a.n(), a.degree());
  for (const auto& [idx, c] : a.terms()) {
    DifferentialForm term = DifferentialForm::scalar(a.n(), c);
    for (std::size_t i : idx) {
      term = wedge(term, images_[i]);
      if (term.is_zero()) break;
    }
    out = out + term;
  }
  return out;
}

DifferentialForm reduce_mod(const DifferentialForm& a, const std::vector<DifferentialForm>& theta,
                            const std::vector<std::size_t>& pivots, const Domain& domain, std::uint64_t seed) {
  return Reducer(theta, pivots, domain, seed).reduce(a);
}

}  // namespace pfaffian
