// Independent numeric checks used by several suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fjq/index_expr.hpp"
#include "fjq/inversion.hpp"
#include "fjq/kernel_matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// Plane-wave value of a constant entry: d_j -> k_j, invlap -> 1/k^2.
inline double entry_value(const fjq::OperatorEntry& o, double k1, double k2, const std::map<std::string, double>& params) {
  long double s = 0;
  for (const auto& [a, c] : o.coeffs())
    for (const auto& [m, q] : c.terms()) {
      long double v = static_cast<long double>(q.get_num().get_d()) / static_cast<long double>(q.get_den().get_d());
      for (const auto& [p, k] : m.params) v *= std::pow(static_cast<long double>(params.at(p)), k);
      s += v * std::pow(static_cast<long double>(k1), a[0]) * std::pow(static_cast<long double>(k2), a[1]);
    }
  return static_cast<double>(s / std::pow(static_cast<long double>(k1) * k1 + static_cast<long double>(k2) * k2, o.inv_lap()));
}

inline Dense evaluate(const fjq::KernelMatrix& m, double k1, double k2, const std::map<std::string, double>& params) {
  Dense d(m.nrows(), std::vector<double>(m.ncols()));
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j) d[i][j] = entry_value(m.at(i, j), k1, k2, params);
  return d;
}

// Gauss-Jordan with partial pivoting in extended precision; returns false
// when singular.
inline bool invert(const Dense& in, Dense& inv) {
  using Wide = std::vector<std::vector<long double>>;
  std::size_t n = in.size();
  Wide a(n, std::vector<long double>(n)), w(n, std::vector<long double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = in[i][j];
    w[i][i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-12L) return false;
    std::swap(a[p], a[c]);
    std::swap(w[p], w[c]);
    long double piv = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      w[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      long double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        w[r][j] -= f * w[c][j];
      }
    }
  }
  inv.assign(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = static_cast<double>(w[i][j]);
  return true;
}

inline int rank(Dense a, double tol = 1e-9) {
  std::size_t nr = a.size(), nc = nr ? a[0].size() : 0;
  int rk = 0;
  for (std::size_t c = 0; c < nc && static_cast<std::size_t>(rk) < nr; ++c) {
    std::size_t p = rk;
    for (std::size_t r = rk; r < nr; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < tol) continue;
    std::swap(a[p], a[rk]);
    for (std::size_t r = 0; r < nr; ++r) {
      if (r == static_cast<std::size_t>(rk)) continue;
      double f = a[r][c] / a[rk][c];
      for (std::size_t j = 0; j < nc; ++j) a[r][j] -= f * a[rk][j];
    }
    ++rk;
  }
  return rk;
}

inline double max_diff(const Dense& a, const Dense& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

using namespace fjq;

// Random one-forms of first order in a few scalar fields.
inline std::map<Label, Expr> random_one_forms(std::mt19937& rng, const std::vector<Label>& vars) {
  std::uniform_int_distribution<int> coef(-4, 4), pick(0, static_cast<int>(vars.size()) - 1), kind(0, 3), dir(1, 2);
  std::map<Label, Expr> a;
  for (const auto& v : vars) {
    Expr e;
    int terms = 1 + kind(rng);
    for (int t = 0; t < terms; ++t) {
      Expr x = Expr::symbol(vars[pick(rng)]), y = Expr::symbol(vars[pick(rng)]);
      Rational c(coef(rng), 1 + std::abs(coef(rng)));
      switch (kind(rng)) {
        case 0: e += c * x; break;
        case 1: e += c * apply_partial(dir(rng), x); break;
        case 2: e += c * x * y; break;
        default: e += c * Expr::param("Lambda") * x * apply_partial(dir(rng), y); break;
      }
    }
    a[v] = e;
  }
  return a;
}

// Numeric check of sum_i adjoint(m_ij) n_i = 0 at a Fourier point.
inline double mode_residual(const KernelMatrix& m, const ModeVector& v, double k1, double k2,
                            const std::map<std::string, double>& params) {
  double worst = 0;
  for (const auto& [f, comps] : v.parts)
    for (std::size_t j = 0; j < m.ncols(); ++j) {
      double s = 0;
      for (std::size_t i = 0; i < m.nrows(); ++i)
        s += entry_value(m.at(i, j), -k1, -k2, params) * entry_value(comps[i], k1, k2, params);
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

inline OperatorEntry random_entry(std::mt19937& rng) {
  static const char* forms[] = {"1", "D(1)", "D(2)", "Lambda", "D(1) - 2*D(2)"};
  std::uniform_int_distribution<int> coef(-3, 3), form(0, 4);
  int c = coef(rng);
  return c ? compose(OperatorEntry::scalar(Expr(c)), parse_op(forms[form(rng)])) : OperatorEntry();
}

inline KernelMatrix labelled(std::size_t n, std::size_t k, const std::string& prefix) {
  std::vector<Label> r, c;
  for (std::size_t i = 0; i < n; ++i) r.emplace_back(prefix + "r", static_cast<int>(i));
  for (std::size_t j = 0; j < k; ++j) c.emplace_back(prefix + "c", static_cast<int>(j));
  return KernelMatrix(r, c);
}

// L U with L unit lower bidiagonal and U upper bidiagonal with monomial
// diagonal: invertible, with a polynomial and well-conditioned inverse. The
// last `deficient` rows of U are zero, leaving that many left null vectors.
inline KernelMatrix random_kernel(std::mt19937& rng, std::size_t n, std::size_t deficient, const std::string& prefix) {
  KernelMatrix l = labelled(n, n, prefix);
  KernelMatrix u(l.cols(), l.cols());
  std::uniform_int_distribution<int> diag(1, 3);
  for (std::size_t i = 0; i < n; ++i) {
    l.at(i, i) = OperatorEntry::identity();
    if (i > 0) l.at(i, i - 1) = random_entry(rng);
    if (i >= n - deficient) continue;
    u.at(i, i) = OperatorEntry::scalar(Expr(diag(rng)) * Expr::param("Lambda", i % 2 ? 1 : 0));
    if (i + 1 < n) u.at(i, i + 1) = random_entry(rng);
  }
  return matmul_reference(l, u);
}

}  // namespace oracle
