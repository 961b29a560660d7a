#include "pfaffian/linalg.hpp"

#include <algorithm>
#include <optional>

#include "pfaffian/factor.hpp"

namespace pfaffian {

PivotClass classify_pivot(const Expr& e, const Domain& domain) {
  if (e.is_constant()) return PivotClass::Constant;
  if (domain.is_assumed_nonzero(e)) return PivotClass::AssumedNonzero;
  return PivotClass::ProvenNonzero;
}

namespace {

struct PivotChoice {
  std::size_t row;
  std::size_t col;
};

std::optional<PivotChoice> choose_pivot(const ExprMatrix& m, std::size_t first_row, const std::vector<bool>& used,
                                        const PivotPolicy& policy) {
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  std::optional<PivotChoice> best;
  int best_class = 3;
  const Expr* undecided = nullptr;
  for (std::size_t c = 0; c < std::min(cols, policy.pivot_column_limit); ++c) {
    if (used[c]) continue;
    for (std::size_t r = first_row; r < m.size(); ++r) {
      const Expr& e = m[r][c];
      if (e.is_zero()) continue;
      int cls = static_cast<int>(classify_pivot(e, policy.domain));
      if (cls >= best_class) continue;
      if (cls == static_cast<int>(PivotClass::ProvenNonzero) &&
          is_zero(e, derive_seed(policy.seed, r * 1000 + c), policy.domain).status != ZeroStatus::ProvenNonzero) {
        undecided = &e;
        continue;
      }
      best_class = cls;
      best = PivotChoice{r, c};
    }
  }
  if (!best && undecided) {
    throw Error(policy.undecided, policy.module,
                "cannot certify entry " + undecided->to_string(policy.domain.symbols()) + " as nonzero");
  }
  return best;
}

}  // namespace

RowReduction row_reduce(ExprMatrix m, const PivotPolicy& policy) {
  RowReduction out;
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  std::vector<bool> used(cols, false);
  std::size_t row = 0;
  while (row < m.size()) {
    const auto choice = choose_pivot(m, row, used, policy);
    if (!choice) break;
    std::swap(m[row], m[choice->row]);
    const std::size_t c = choice->col;
    const Expr pivot = m[row][c];
    out.pivots.push_back(pivot);
    const Expr inv = pivot.inverse();
    for (auto& e : m[row]) e = e * inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][c].is_zero()) continue;
      const Expr factor = m[r][c];
      for (std::size_t k = 0; k < cols; ++k) {
        if (!m[row][k].is_zero()) m[r][k] = m[r][k] - factor * m[row][k];
      }
    }
    used[c] = true;
    out.pivot_columns.push_back(c);
    ++row;
  }
  out.reduced = std::move(m);
  return out;
}

std::vector<std::vector<Expr>> null_space(const RowReduction& r, std::size_t columns) {
  std::vector<bool> is_pivot(columns, false);
  for (std::size_t c : r.pivot_columns) is_pivot[c] = true;
  std::vector<std::vector<Expr>> basis;
  for (std::size_t j = 0; j < columns; ++j) {
    if (is_pivot[j]) continue;
    std::vector<Expr> v(columns);
    v[j] = Expr(1);
    for (std::size_t i = 0; i < r.pivot_columns.size(); ++i) v[r.pivot_columns[i]] = -r.reduced[i][j];
    basis.push_back(std::move(v));
  }
  return basis;
}

Expr determinant(ExprMatrix m) {
  const std::size_t n = m.size();
  Expr det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    // Prefer a constant pivot, else the first nonzero entry.
    for (std::size_t r = c; r < n; ++r) {
      if (m[r][c].is_constant() && !m[r][c].is_zero()) {
        p = r;
        break;
      }
      if (m[p][c].is_zero() && !m[r][c].is_zero()) p = r;
    }
    if (m[p][c].is_zero()) return Expr{};
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det = det * m[c][c];
    const Expr inv = m[c][c].inverse();
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m[r][c].is_zero()) continue;
      const Expr factor = m[r][c] * inv;
      for (std::size_t k = c; k < n; ++k) m[r][k] = m[r][k] - factor * m[c][k];
    }
  }
  return det;
}

ExprMatrix transpose(const ExprMatrix& m) {
  if (m.empty()) return {};
  ExprMatrix t(m[0].size(), std::vector<Expr>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) t[j][i] = m[i][j];
  }
  return t;
}

ExprMatrix submatrix(const ExprMatrix& m, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  ExprMatrix out;
  for (std::size_t r : rows) {
    std::vector<Expr> row;
    for (std::size_t c : cols) row.push_back(m[r][c]);
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

// A common factor can hide behind the sin^2 = 1 - cos^2 rewrite (it is then
// invisible to the free-ring gcd). Factors of the smallest entry are tried
// against every entry by division in the trig ring.
void remove_trig_common_factors(std::vector<Poly>& polys) {
  const Poly* smallest = nullptr;
  for (const Poly& p : polys) {
    if (!p.is_zero() && (!smallest || p.size() < smallest->size())) smallest = &p;
  }
  if (!smallest || smallest->is_constant()) return;
  const Factorization f = factor(*smallest);
  for (const auto& [q, mult] : f.factors) {
    const Expr divisor = Expr::polynomial(q);
    for (unsigned k = 0; k < mult; ++k) {
      std::vector<Poly> divided;
      for (const Poly& p : polys) {
        const Expr quotient = Expr::polynomial(p) / divisor;
        if (!quotient.is_polynomial()) break;
        divided.push_back(quotient.numerator());
      }
      if (divided.size() != polys.size()) break;
      polys = std::move(divided);
    }
  }
}

}  // namespace

std::vector<Expr> clear_denominators(const std::vector<Expr>& v) {
  Poly lcm(1);
  for (const Expr& e : v) {
    if (e.is_polynomial()) continue;
    const Poly g = gcd(lcm, e.denominator());
    lcm = lcm * *divide_exact(e.denominator(), g);
  }
  std::vector<Poly> polys;
  for (const Expr& e : v) polys.push_back((e * Expr::polynomial(lcm)).numerator());

  Poly common;
  for (const Poly& p : polys) common = gcd(common, p);
  mpz_class num = 0, den = 1;
  for (Poly& p : polys) {
    if (!common.is_zero() && !common.is_constant()) p = *divide_exact(p, common);
    for (const auto& [m, c] : p.terms()) {
      mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), c.get_num_mpz_t());
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    }
  }
  if (num == 0) return v;
  remove_trig_common_factors(polys);
  num = 0;
  den = 1;
  for (const Poly& p : polys) {
    for (const auto& [m, c] : p.terms()) {
      mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), c.get_num_mpz_t());
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
    }
  }
  Rational scale(den, num);
  scale.canonicalize();
  for (const Poly& p : polys) {
    if (!p.is_zero()) {
      if (p.leading_coefficient() < 0) scale = -scale;
      break;
    }
  }
  std::vector<Expr> out;
  for (const Poly& p : polys) out.push_back(Expr::polynomial(p * scale));
  return out;
}

Eigen::MatrixXd evaluate(const ExprMatrix& m, const Assignment& p) {
  const Eigen::Index rows = static_cast<Eigen::Index>(m.size());
  const Eigen::Index cols = m.empty() ? 0 : static_cast<Eigen::Index>(m[0].size());
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = evaluate(m[i][j], p);
  }
  return out;
}

std::size_t numeric_rank(const Eigen::MatrixXd& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > threshold) ++rank;
  }
  return rank;
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace pfaffian
