#include "fjq/inversion.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>

namespace fjq {

int FourierRing::param_index(const std::string& p) const {
  for (std::size_t i = 2; i < names.size(); ++i)
    if (names[i] == p) return static_cast<int>(i);
  return -1;
}

namespace {

Poly laplacian(int n) { return Poly::variable(n, 0, 2) + Poly::variable(n, 1, 2); }

Poly lcm(const Poly& a, const Poly& b) {
  if (a.is_constant()) return b;
  if (b.is_constant()) return a;
  return exact_divide(a * b, gcd(a, b));
}

RatMatrix flip_transpose(const RatMatrix& m, std::size_t nrows, std::size_t ncols, int nvars) {
  RatMatrix t(ncols, std::vector<RatFunc>(nrows, RatFunc(nvars)));
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j < ncols; ++j) t[j][i] = m[i][j].flip(0).flip(1);
  return t;
}

// Rows of a rational submatrix scaled to polynomials: row r multiplied by
// the lcm of its denominators.
std::vector<std::vector<Poly>> clear_rows(const RatMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols,
                                          int nvars, std::vector<Poly>* scales) {
  std::vector<std::vector<Poly>> out;
  for (int r : rows) {
    Poly d = Poly::constant(nvars, 1);
    for (int c : cols)
      if (!m[r][c].is_zero()) d = lcm(d, m[r][c].den());
    std::vector<Poly> row;
    for (int c : cols) row.push_back(m[r][c].is_zero() ? Poly(nvars) : m[r][c].num() * exact_divide(d, m[r][c].den()));
    out.push_back(std::move(row));
    if (scales) scales->push_back(d);
  }
  return out;
}

template <class F>
void run_blocks(std::size_t n, bool parallel, F f) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long k = 0; k < static_cast<long>(n); ++k) {
    try {
      f(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

struct NullBlock {
  int rank = 0;
  // (free global row of M, vector over global rows of M)
  std::vector<std::pair<int, std::vector<Poly>>> vecs;
};

NullBlock null_block(const RatMatrix& b, const std::vector<int>& brows, const std::vector<int>& bcols, int nvars,
                     std::size_t mrows) {
  NullBlock out;
  auto a = clear_rows(b, brows, bcols, nvars, nullptr);
  EliminationResult er;
  if (!brows.empty()) er = fraction_free_rref(a, static_cast<int>(bcols.size()));
  out.rank = static_cast<int>(er.pivots.size());
  std::set<int> piv(er.pivots.begin(), er.pivots.end());
  for (int f = 0; f < static_cast<int>(bcols.size()); ++f) {
    if (piv.count(f)) continue;
    std::vector<Poly> v(mrows, Poly(nvars));
    v[bcols[f]] = er.pivots.empty() ? Poly::constant(nvars, 1) : er.pivot_value;
    for (std::size_t r = 0; r < er.pivots.size(); ++r) v[bcols[er.pivots[r]]] = -a[r][f];
    Poly g(nvars);
    for (const auto& p : v)
      if (!p.is_zero()) g = g.is_zero() ? monic(p) : gcd(g, p);
    Rational lc = exact_divide(v[bcols[f]], g).lead().second;
    for (auto& p : v)
      if (!p.is_zero()) p = exact_divide(p, g).scaled(1 / lc);
    out.vecs.emplace_back(bcols[f], std::move(v));
  }
  return out;
}

struct Analysis {
  int rank = 0;
  std::vector<std::pair<int, std::vector<Poly>>> vecs;
};

Analysis analyze_left(const FourierSymbol& fs, LinearOptions opt) {
  std::size_t R = fs.rows.size(), C = fs.cols.size();
  int nv = fs.ring.nvars();
  RatMatrix b = flip_transpose(fs.m, R, C, nv);
  auto comps = block_components(b, R);
  std::vector<NullBlock> res(comps.size());
  run_blocks(comps.size(), opt.parallel,
             [&](std::size_t k) { res[k] = null_block(b, comps[k].first, comps[k].second, nv, R); });
  Analysis a;
  for (auto& r : res) {
    a.rank += r.rank;
    for (auto& v : r.vecs) a.vecs.push_back(std::move(v));
  }
  std::sort(a.vecs.begin(), a.vecs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return a;
}

std::vector<ModeVector> to_modes(const FourierSymbol& fs, const Analysis& a) {
  std::vector<ModeVector> out;
  for (const auto& [free, vec] : a.vecs) {
    ModeVector mv;
    mv.rows = fs.rows;
    const Label& l = fs.rows[free];
    Symbol f("v_" + l.name, l.internal, l.spatial);
    std::vector<OperatorEntry> comp;
    for (const auto& p : vec) comp.push_back(from_ratfunc(RatFunc(p), fs.ring));
    mv.parts[f] = std::move(comp);
    out.push_back(std::move(mv));
  }
  return out;
}

void require_constant(const KernelMatrix& m) {
  if (!m.is_constant())
    throw Error(ErrorKind::NotConstant, "kernel has field-dependent coefficients; an ansatz is required");
}

}  // namespace

RatFunc to_ratfunc(const OperatorEntry& o, const FourierRing& ring) {
  int n = ring.nvars();
  if (o.is_zero()) return RatFunc(n);
  std::vector<int> shift(n, 0);
  for (const auto& [a, c] : o.coeffs()) {
    if (!c.is_field_free()) throw Error(ErrorKind::NotConstant, "Fourier symbol of a field-dependent entry");
    for (const auto& [mono, q] : c.terms())
      for (const auto& [p, k] : mono.params) {
        int idx = ring.param_index(p);
        if (idx < 0) throw Error(ErrorKind::UnknownName, "parameter " + p + " missing from the Fourier ring");
        shift[idx] = std::max(shift[idx], -k);
      }
  }
  Poly num(n);
  for (const auto& [a, c] : o.coeffs())
    for (const auto& [mono, q] : c.terms()) {
      Poly::Exps e(n, 0);
      e[0] = a[0];
      e[1] = a[1];
      for (int i = 2; i < n; ++i) e[i] = shift[i];
      for (const auto& [p, k] : mono.params) e[ring.param_index(p)] += k;
      num.add(e, q);
    }
  Poly::Exps de(n, 0);
  for (int i = 2; i < n; ++i) de[i] = shift[i];
  Poly den = Poly::monomial(de, 1);
  Poly L = laplacian(n);
  for (int i = 0; i < o.inv_lap(); ++i) den = den * L;
  return RatFunc(num, den);
}

OperatorEntry from_ratfunc(const RatFunc& r, const FourierRing& ring) {
  if (r.is_zero()) return {};
  int n = ring.nvars();
  Poly L = laplacian(n);
  Poly d = r.den();
  int p = 0;
  while (!d.is_constant()) {
    auto q = try_divide(d, L);
    if (!q) break;
    d = *q;
    ++p;
  }
  if (d.terms().size() != 1 || d.lead().first[0] != 0 || d.lead().first[1] != 0)
    throw Error(ErrorKind::Unsupported, "non-local denominator " + render(r.den(), ring.names));
  auto [de, dc] = d.lead();
  std::map<Multi, Expr> numer;
  for (const auto& [e, c] : r.num().terms()) {
    Monomial m;
    for (int i = 2; i < n; ++i)
      if (e[i] - de[i] != 0) m.params.emplace_back(ring.names[i], e[i] - de[i]);
    std::sort(m.params.begin(), m.params.end());
    numer[{e[0], e[1]}] += Expr::term(m, c / dc);
  }
  return OperatorEntry::from_parts(std::move(numer), p);
}

FourierSymbol fourier_symbol(const KernelMatrix& m) {
  FourierSymbol fs;
  std::set<std::string> params;
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j)
      for (const auto& [a, c] : m.at(i, j).coeffs())
        for (const auto& [mono, q] : c.terms())
          for (const auto& [p, k] : mono.params) params.insert(p);
  for (const auto& p : params) fs.ring.names.push_back(p);
  fs.rows = m.rows();
  fs.cols = m.cols();
  int n = fs.ring.nvars();
  fs.m.assign(m.nrows(), std::vector<RatFunc>(m.ncols(), RatFunc(n)));
  for (std::size_t i = 0; i < m.nrows(); ++i)
    for (std::size_t j = 0; j < m.ncols(); ++j) fs.m[i][j] = to_ratfunc(m.at(i, j), fs.ring);
  return fs;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> block_components(const RatMatrix& m, std::size_t ncols) {
  std::size_t R = m.size();
  std::vector<int> parent(R + ncols);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < ncols; ++j)
      if (!m[i][j].is_zero()) parent[find(static_cast<int>(i))] = find(static_cast<int>(R + j));
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> by;
  for (std::size_t i = 0; i < R; ++i) by[find(static_cast<int>(i))].first.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < ncols; ++j) by[find(static_cast<int>(R + j))].second.push_back(static_cast<int>(j));
  std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
  for (auto& [k, v] : by) out.push_back(std::move(v));
  return out;
}

EliminationResult fraction_free_rref(std::vector<std::vector<Poly>>& a, int ncols_to_pivot) {
  EliminationResult res;
  if (a.empty()) return res;
  int nv = a[0].empty() ? 0 : a[0][0].nvars();
  std::size_t nr = a.size(), nc = a[0].size();
  Poly prev = Poly::constant(nv, 1);
  std::size_t row = 0;
  for (int col = 0; col < ncols_to_pivot && row < nr; ++col) {
    std::size_t p = row;
    while (p < nr && a[p][col].is_zero()) ++p;
    if (p == nr) continue;
    std::swap(a[p], a[row]);
    const Poly piv = a[row][col];
    for (std::size_t i = 0; i < nr; ++i) {
      if (i == row) continue;
      const Poly f = a[i][col];
      for (std::size_t j = 0; j < nc; ++j) {
        if (static_cast<int>(j) == col) continue;
        Poly v = piv * a[i][j];
        if (!f.is_zero() && !a[row][j].is_zero()) v = v - f * a[row][j];
        a[i][j] = prev.is_constant() ? v.scaled(1 / (prev.is_zero() ? Rational(1) : prev.lead().second))
                                     : exact_divide(v, prev);
      }
      a[i][col] = Poly(nv);
    }
    prev = piv;
    res.pivots.push_back(col);
    ++row;
  }
  res.pivot_value = prev;
  return res;
}

KernelMatrix invert_constant(const KernelMatrix& m, LinearOptions opt) {
  if (m.nrows() != m.ncols())
    throw Error(ErrorKind::Dimension, "cannot invert a " + std::to_string(m.nrows()) + "x" + std::to_string(m.ncols()) + " kernel");
  require_constant(m);
  FourierSymbol fs = fourier_symbol(m);
  int nv = fs.ring.nvars();
  auto comps = block_components(fs.m, m.ncols());
  std::vector<std::vector<std::vector<RatFunc>>> blocks(comps.size());
  std::vector<char> singular(comps.size(), 0);
  run_blocks(comps.size(), opt.parallel, [&](std::size_t k) {
    const auto& [rows, cols] = comps[k];
    std::size_t n = rows.size();
    if (n != cols.size() || n == 0) {
      singular[k] = 1;
      return;
    }
    std::vector<Poly> scales;
    auto a = clear_rows(fs.m, rows, cols, nv, &scales);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i].push_back(i == j ? Poly::constant(nv, 1) : Poly(nv));
    auto er = fraction_free_rref(a, static_cast<int>(n));
    if (er.pivots.size() < n) {
      singular[k] = 1;
      return;
    }
    blocks[k].assign(n, std::vector<RatFunc>(n, RatFunc(nv)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!a[i][n + j].is_zero()) blocks[k][i][j] = RatFunc(a[i][n + j] * scales[j], a[i][i]);
  });
  if (std::any_of(singular.begin(), singular.end(), [](char c) { return c; })) {
    Analysis an = analyze_left(fs, opt);
    throw SingularError("kernel is singular (rank " + std::to_string(an.rank) + " of " + std::to_string(m.nrows()) + ")",
                        an.rank, to_modes(fs, an));
  }
  KernelMatrix inv(m.cols(), m.rows());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& [rows, cols] = comps[k];
    for (std::size_t i = 0; i < cols.size(); ++i)
      for (std::size_t j = 0; j < rows.size(); ++j) inv.at(cols[i], rows[j]) = from_ratfunc(blocks[k][i][j], fs.ring);
  }
  return inv;
}

std::vector<ModeVector> left_null_space(const KernelMatrix& m, LinearOptions opt) {
  require_constant(m);
  FourierSymbol fs = fourier_symbol(m);
  return to_modes(fs, analyze_left(fs, opt));
}

int kernel_rank(const KernelMatrix& m, LinearOptions opt) {
  require_constant(m);
  return analyze_left(fourier_symbol(m), opt).rank;
}

std::vector<std::map<Symbol, OperatorEntry>> verify_mode(const KernelMatrix& m, const ModeVector& v) {
  if (v.rows != m.rows()) throw Error(ErrorKind::Dimension, "mode rows do not match the kernel rows");
  std::vector<std::map<Symbol, OperatorEntry>> out(m.ncols());
  for (std::size_t j = 0; j < m.ncols(); ++j)
    for (const auto& [f, comps] : v.parts) {
      OperatorEntry acc;
      for (std::size_t i = 0; i < m.nrows(); ++i)
        if (!m.at(i, j).is_zero() && !comps[i].is_zero()) acc += compose(adjoint(m.at(i, j)), comps[i]);
      if (!acc.is_zero()) out[j][f] = acc;
    }
  return out;
}

bool mode_annihilates(const KernelMatrix& m, const ModeVector& v) {
  for (const auto& c : verify_mode(m, v))
    if (!c.empty()) return false;
  return true;
}

KernelMatrix verify_inverse(const KernelMatrix& m, const KernelMatrix& n) {
  if (m.ncols() != n.nrows() || m.rows() != n.cols())
    throw Error(ErrorKind::Dimension, "inverse candidate has incompatible labels");
  return matmul(m, n) - KernelMatrix::identity(m.rows());
}

bool ModeVector::is_zero() const {
  for (const auto& [f, c] : parts)
    for (const auto& o : c)
      if (!o.is_zero()) return false;
  return true;
}

std::string ModeVector::render() const {
  std::ostringstream os;
  bool first = true;
  os << "(";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string comp;
    for (const auto& [f, c] : parts) {
      if (c[i].is_zero()) continue;
      if (!comp.empty()) comp += " + ";
      std::string op = fjq::render(c[i]);
      comp += (op == "1" ? "" : "(" + op + ")") + fjq::render(f);
    }
    if (comp.empty()) continue;
    os << (first ? "" : ", ") << fjq::render(rows[i]) << ": " << comp;
    first = false;
  }
  os << ")";
  return os.str();
}

std::map<Symbol, Expr> ModeVector::contract(const std::vector<Expr>& z) const {
  std::map<Symbol, Expr> out;
  for (const auto& [f, c] : parts) {
    Expr acc;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!c[i].is_zero() && !z[i].is_zero()) acc += adjoint(c[i]).apply(z[i]);
    out[f] = acc;
  }
  return out;
}

ModeVector ModeVector::relabel(const std::vector<Label>& new_rows, const std::map<Label, Label>& mapping,
                               const std::map<Label, int>& signs) const {
  ModeVector r;
  r.rows = new_rows;
  for (const auto& [f, c] : parts) {
    std::vector<OperatorEntry> comp(new_rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Label target = mapping.count(rows[i]) ? mapping.at(rows[i]) : rows[i];
      auto it = std::find(new_rows.begin(), new_rows.end(), target);
      if (it == new_rows.end()) continue;
      int s = signs.count(rows[i]) ? signs.at(rows[i]) : 1;
      comp[it - new_rows.begin()] += s < 0 ? -c[i] : c[i];
    }
    r.parts[f] = std::move(comp);
  }
  return r;
}

}  // namespace fjq
