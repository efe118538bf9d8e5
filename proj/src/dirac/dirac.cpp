#include "fjq/dirac.hpp"

#include <algorithm>

#include "fjq/error.hpp"

namespace fjq {

std::vector<Label> PhaseSpace::labels() const {
  std::vector<Label> out;
  for (const auto& c : pairs) out.push_back(c.q);
  for (const auto& c : pairs) out.push_back(c.p);
  return out;
}

std::set<std::string> PhaseSpace::momentum_names() const {
  std::set<std::string> out;
  for (const auto& c : pairs) out.insert(c.p.name);
  return out;
}

namespace {

bool has_velocity(const Expr& e) {
  for (const auto& s : e.symbols())
    if (s.tags[0] > 0) return true;
  return false;
}

// Replaces first time derivatives of solved coordinates.
Expr substitute_velocities(const Expr& e, const std::map<Label, Expr>& solved) {
  Expr out;
  for (const auto& [m, c] : e.terms()) {
    Monomial rest;
    rest.params = m.params;
    Expr acc = Expr::term(rest, c);
    for (const auto& s : m.fields) {
      auto it = s.tags[0] == 1 ? solved.find(s.base()) : solved.end();
      if (it != solved.end()) acc = acc * apply_partials({0, s.tags[1], s.tags[2]}, it->second);
      else acc = acc * Expr::symbol(s);
    }
    out += acc;
  }
  return out;
}

std::optional<Label> origin_of(const Symbol& f, const std::vector<ConstraintRecord>& cs) {
  if (f.name.rfind("v_", 0) != 0) return std::nullopt;
  Label o(f.name.substr(2), f.internal, f.spatial);
  for (const auto& c : cs)
    if (c.label == o) return o;
  return std::nullopt;
}

// Matches a derived density to a normal form modulo the reducer.
ConstraintRecord match_weak(const Expr& derived, const std::vector<NormalForm>& forms, const WeakReducer& red,
                            const std::optional<Label>& origin, int level, int serial) {
  ConstraintRecord r = classify_constraint(derived, forms, origin, level, serial);
  if (r.matched) return r;
  for (const auto& nf : forms) {
    Expr reduced = red.reduce(nf.expr);
    if (reduced.is_zero()) continue;
    if (auto f = proportionality(derived, reduced)) {
      r.label = nf.label;
      r.normal = nf.expr;
      r.factor = *f;
      r.matched = true;
      return r;
    }
  }
  return r;
}

std::vector<Expr> normals(const std::vector<ConstraintRecord>& cs) {
  std::vector<Expr> out;
  for (const auto& c : cs) out.push_back(c.normal);
  return out;
}

std::vector<Label> labels_of(const std::vector<ConstraintRecord>& cs) {
  std::vector<Label> out;
  for (const auto& c : cs) out.push_back(c.label);
  return out;
}

KernelMatrix constraint_matrix(const std::vector<ConstraintRecord>& cs, const PhaseSpace& ps) {
  auto e = normals(cs);
  auto l = labels_of(cs);
  return bracket_matrix(e, l, e, l, ps);
}

KernelMatrix submatrix(const KernelMatrix& m, const std::vector<std::size_t>& idx) {
  std::vector<Label> l;
  for (auto i : idx) l.push_back(m.rows()[i]);
  KernelMatrix s(l, l);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) s.at(a, b) = m.at(idx[a], idx[b]);
  return s;
}

int family_count(const std::vector<ConstraintRecord>& cs) {
  std::set<std::pair<std::string, int>> names;
  for (const auto& c : cs) names.insert({c.label.name, c.label.spatial});
  return static_cast<int>(names.size());
}

}  // namespace

LegendreResult legendre(const DiracInput& in) {
  LegendreResult r;
  for (const auto& s : in.lagrangian.symbols())
    if (s.tags[0] > 1) throw Error(ErrorKind::Unsupported, "Lagrangian has second-order time derivatives (" + render(s) + ")");
  for (const auto& q : in.fields) {
    auto it = in.momentum_names.find(q.name);
    if (it == in.momentum_names.end()) throw Error(ErrorKind::Validation, "no momentum declared for " + q.name);
    r.space.pairs.push_back({q, Label(it->second, q.internal, q.spatial)});
  }
  std::map<Label, Expr> solved;
  int serial = 0;
  for (const auto& [q, p] : r.space.pairs) {
    Expr P = functional_derivative(in.lagrangian, q.derived(0));
    r.momenta[p] = P;
    if (!has_velocity(P)) {
      r.primaries.push_back(classify_constraint(Expr::symbol(p) - P, in.normal_forms, p, 0, serial++));
      continue;
    }
    // Diagonal case: P = c * qdot' + rest.
    std::optional<Symbol> v;
    Expr coef, rest;
    for (const auto& [m, c] : P.terms()) {
      int nv = 0;
      for (const auto& f : m.fields) nv += f.tags[0] > 0;
      if (nv == 0) {
        rest += Expr::term(m, c);
        continue;
      }
      if (nv > 1 || m.fields.size() != 1 || m.fields[0].spatial_order() != 0 || (v && *v != m.fields[0]))
        throw Error(ErrorKind::Unsupported, "velocity Hessian for " + render(q) + " is not diagonal and constant");
      v = m.fields[0];
      Monomial pm;
      pm.params = m.params;
      coef = Expr::term(pm, c);
    }
    Label target = v->base();
    if (solved.count(target)) throw Error(ErrorKind::Unsupported, "velocity of " + render(target) + " appears in two momenta");
    solved[target] = coef.inverse_monomial() * (Expr::symbol(p) - rest);
    r.solved_velocities.push_back(target);
  }
  Expr h = -in.lagrangian;
  for (const auto& [q, p] : r.space.pairs)
    if (solved.count(q)) h += Expr::symbol(p) * Expr::symbol(q.derived(0));
  for (const auto& [m, c] : h.terms()) {
    int nv = 0;
    for (const auto& f : m.fields)
      if (f.tags[0] > 0 && !solved.count(f.base())) ++nv;
    if (nv > 1) throw Error(ErrorKind::Unsupported, "Lagrangian is not linear in the unsolved velocities");
  }
  h = substitute_velocities(h, solved);
  // On the primary surface the unsolved velocity terms cancel against p qdot.
  r.hamiltonian = h.drop_terms([](const Symbol& s) { return s.tags[0] > 0; });
  return r;
}

OperatorEntry poisson_bracket(const Expr& f, const Expr& g, const PhaseSpace& ps) {
  OperatorEntry k;
  for (const auto& [q, p] : ps.pairs) {
    bool fq = f.depends_on_base(q), fp = f.depends_on_base(p);
    bool gq = g.depends_on_base(q), gp = g.depends_on_base(p);
    if (fq && gp) k += compose(linearization(f, q), adjoint(linearization(g, p)));
    if (fp && gq) k -= compose(linearization(f, p), adjoint(linearization(g, q)));
  }
  return k;
}

OperatorEntry bracket_of(const Expr& f, const Expr& g, const KernelMatrix& table) {
  OperatorEntry k;
  std::vector<std::pair<std::size_t, OperatorEntry>> lf, lg;
  for (std::size_t a = 0; a < table.nrows(); ++a)
    if (f.depends_on_base(table.rows()[a])) lf.emplace_back(a, linearization(f, table.rows()[a]));
  for (std::size_t b = 0; b < table.ncols(); ++b)
    if (g.depends_on_base(table.cols()[b])) lg.emplace_back(b, adjoint(linearization(g, table.cols()[b])));
  for (const auto& [a, la] : lf)
    for (const auto& [b, lb] : lg)
      if (!table.at(a, b).is_zero()) k += compose(compose(la, table.at(a, b)), lb);
  return k;
}

Expr bracket_with_functional(const Expr& f, const Expr& h, const PhaseSpace& ps) {
  Expr out;
  for (const auto& [q, p] : ps.pairs) {
    if (f.depends_on_base(q)) out += linearization(f, q).apply(functional_derivative(h, p));
    if (f.depends_on_base(p)) out -= linearization(f, p).apply(functional_derivative(h, q));
  }
  return out;
}

KernelMatrix canonical_table(const PhaseSpace& ps) {
  auto l = ps.labels();
  KernelMatrix t(l, l);
  std::size_t n = ps.pairs.size();
  for (std::size_t k = 0; k < n; ++k) {
    t.at(k, n + k) = OperatorEntry::identity();
    t.at(n + k, k) = -OperatorEntry::identity();
  }
  return t;
}

KernelMatrix bracket_matrix(const std::vector<Expr>& rows, const std::vector<Label>& row_labels, const std::vector<Expr>& cols,
                            const std::vector<Label>& col_labels, const PhaseSpace& ps) {
  KernelMatrix m(row_labels, col_labels);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m.at(i, j) = poisson_bracket(rows[i], cols[j], ps);
  return m;
}

ChainResult consistency_chain(const LegendreResult& leg, const DiracInput& in) {
  ChainResult r;
  r.constraints = leg.primaries;
  if (leg.primaries.empty()) return r;
  auto prim = normals(leg.primaries);
  auto plab = labels_of(leg.primaries);
  const int bound = 2 * static_cast<int>(leg.space.pairs.size()) + 2;
  int serial = static_cast<int>(r.constraints.size());
  for (int round = 1;; ++round) {
    if (round > bound) throw Error(ErrorKind::IterationBound, "Dirac consistency chain exceeded its bound");
    auto rows = normals(r.constraints);
    KernelMatrix k = bracket_matrix(rows, labels_of(r.constraints), prim, plab, leg.space);
    if (!k.is_constant()) throw Error(ErrorKind::NeedsAnsatz, "field-dependent multiplier matrix in the consistency chain");
    r.multipliers_fixed.push_back(kernel_rank(k));
    std::vector<Expr> h;
    for (const auto& c : rows) h.push_back(bracket_with_functional(c, leg.hamiltonian, leg.space));
    WeakReducer red;
    for (const auto& c : rows) red.add(c);
    std::vector<ConstraintRecord> fresh;
    for (const auto& mode : left_null_space(k))
      for (const auto& [f, dens] : mode.contract(h)) {
        Expr d = red.reduce(dens);
        if (d.is_zero()) continue;
        ConstraintRecord rec = match_weak(d, in.normal_forms, red, origin_of(f, r.constraints), round, serial++);
        rec.derived = dens;
        red.add(rec.normal);
        fresh.push_back(std::move(rec));
      }
    r.rounds = round;
    if (fresh.empty()) break;
    for (auto& c : fresh) r.constraints.push_back(std::move(c));
  }
  return r;
}

Classification classify(const std::vector<ConstraintRecord>& cs, const PhaseSpace& ps, const DiracInput& in) {
  Classification c;
  c.constraints = cs;
  c.pb = constraint_matrix(cs, ps);
  if (!c.pb.is_constant()) throw Error(ErrorKind::NeedsAnsatz, "field-dependent constraint bracket matrix");
  c.rank = cs.empty() ? 0 : kernel_rank(c.pb);
  int fam = family_count(cs);
  int n = static_cast<int>(cs.size());
  c.block_rank = (n && (c.rank * fam) % n == 0) ? c.rank * fam / n : c.rank;
  c.notes.push_back("constraint bracket matrix: " + std::to_string(n) + " components in " + std::to_string(fam) +
                    " blocks, rank " + std::to_string(c.rank) + " (" + std::to_string(c.block_rank) + " blocks)");

  // Second class: whole blocks in constraint order, then single components.
  std::vector<std::size_t> chosen;
  auto try_add = [&](const std::vector<std::size_t>& extra) {
    auto t = chosen;
    t.insert(t.end(), extra.begin(), extra.end());
    KernelMatrix s = submatrix(c.pb, t);
    if (kernel_rank(s) != static_cast<int>(t.size())) return false;
    chosen = std::move(t);
    return true;
  };
  std::vector<std::string> order;
  for (const auto& r : cs)
    if (std::find(order.begin(), order.end(), r.label.name) == order.end()) order.push_back(r.label.name);
  for (const auto& name : order) {
    if (static_cast<int>(chosen.size()) >= c.rank) break;
    std::vector<std::size_t> block;
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (cs[i].label.name == name) block.push_back(i);
    try_add(block);
  }
  for (std::size_t i = 0; i < cs.size() && static_cast<int>(chosen.size()) < c.rank; ++i)
    for (std::size_t j = i + 1; j < cs.size() && static_cast<int>(chosen.size()) < c.rank; ++j) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) break;
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      if (try_add({i, j})) break;
    }
  if (static_cast<int>(chosen.size()) != c.rank)
    throw Error(ErrorKind::Validation, "could not select a nonsingular second-class subset of rank " + std::to_string(c.rank));
  std::sort(chosen.begin(), chosen.end());
  for (auto i : chosen) c.second_class.push_back(cs[i]);
  if (!c.second_class.empty()) {
    c.second_class_matrix = submatrix(c.pb, chosen);
    c.second_class_inverse = invert_constant(c.second_class_matrix);
  }

  auto ex = normals(cs);
  auto strong = ex;
  for (auto i : chosen) strong[i] = Expr();
  int serial = 0;
  if (!cs.empty())
    for (const auto& mode : left_null_space(c.pb)) {
      auto dens_strong = mode.contract(strong);
      for (const auto& [f, dens] : mode.contract(ex)) {
        if (dens.is_zero()) continue;
        ConstraintRecord rec = classify_constraint(dens, in.normal_forms, origin_of(f, cs), 0, serial++);
        if (!rec.matched) rec.label = Label("FC" + std::to_string(serial), f.internal, f.spatial);
        ConstraintRecord st = rec;
        st.derived = st.normal = dens_strong[f];
        if (auto o = origin_of(f, cs))
          for (const auto& r : cs)
            if (r.label == *o && r.normal == st.normal) st.label = r.label;
        c.first_class.push_back(std::move(rec));
        c.first_class_strong.push_back(std::move(st));
      }
    }

  WeakReducer red;
  for (const auto& r : cs) red.add(r.normal);
  for (const auto& fc : c.first_class)
    for (const auto& r : cs) {
      OperatorEntry b = poisson_bracket(fc.normal, r.normal, ps).map_coeffs([&](const Expr& x) { return red.reduce(x); });
      if (!b.is_zero())
        throw Error(ErrorKind::Validation, "first-class candidate " + render(fc.label) + " has a nonvanishing bracket with " + render(r.label));
    }
  return c;
}

KernelMatrix dirac_table(const PhaseSpace& ps, const std::vector<ConstraintRecord>& second, const KernelMatrix& cinv) {
  KernelMatrix t = canonical_table(ps);
  if (second.empty()) return t;
  auto l = ps.labels();
  std::vector<Expr> coords;
  for (const auto& x : l) coords.push_back(Expr::symbol(x));
  auto ex = normals(second);
  auto sl = labels_of(second);
  KernelMatrix left = bracket_matrix(coords, l, ex, sl, ps);
  KernelMatrix right = bracket_matrix(ex, sl, coords, l, ps);
  return t - matmul(left, matmul(cinv, right));
}

GaugeFixResult fix_gauge(const Classification& c, const std::vector<NormalForm>& gauge, const PhaseSpace& ps,
                         const DiracInput& in) {
  (void)in;
  std::vector<ConstraintRecord> conds;
  for (const auto& nf : gauge) {
    ConstraintRecord r;
    r.label = nf.label;
    r.derived = r.normal = nf.expr;
    r.matched = true;
    conds.push_back(std::move(r));
  }
  auto invert = [&](const KernelMatrix& m) {
    try {
      return invert_constant(m);
    } catch (const SingularError& e) {
      std::string modes;
      for (const auto& mv : e.modes()) modes += "\n  " + mv.render();
      throw Error(ErrorKind::IncompleteGauge, "gauge conditions leave first-class directions (rank " + std::to_string(e.rank()) +
                                                  " of " + std::to_string(m.nrows()) + "):" + modes);
    }
  };
  std::vector<ConstraintRecord> all = c.first_class;
  for (const auto& r : c.second_class) all.push_back(r);
  for (const auto& r : conds) all.push_back(r);
  KernelMatrix full = constraint_matrix(all, ps);
  if (!full.is_constant()) throw Error(ErrorKind::NeedsAnsatz, "field-dependent gauge-fixed constraint matrix");
  invert(full);

  GaugeFixResult g;
  Classification& u = g.classification;
  u.constraints = all;
  u.pb = full;
  u.rank = static_cast<int>(all.size());
  u.block_rank = family_count(all);
  std::vector<ConstraintRecord> fixed = c.first_class_strong;
  for (const auto& r : conds) fixed.push_back(r);
  u.second_class = fixed;
  u.second_class_matrix = constraint_matrix(fixed, ps);
  u.second_class_inverse = invert(u.second_class_matrix);
  g.table = dirac_table(ps, fixed, u.second_class_inverse);
  return g;
}

DiracResult run_dirac(const DiracInput& in, const std::optional<std::string>& gauge) {
  DiracResult r;
  r.legendre = legendre(in);
  r.chain = consistency_chain(r.legendre, in);
  r.classification = classify(r.chain.constraints, r.legendre.space, in);
  r.table = dirac_table(r.legendre.space, r.classification.second_class, r.classification.second_class_inverse);
  int n = static_cast<int>(r.legendre.space.pairs.size());
  int f = static_cast<int>(r.classification.first_class.size());
  int s = static_cast<int>(r.classification.second_class.size());
  if ((2 * n - 2 * f - s) % 2)
    throw Error(ErrorKind::InconsistentCount, "odd phase-space count: " + std::to_string(2 * n) + " variables, " + std::to_string(f) +
                                                  " first-class, " + std::to_string(s) + " second-class");
  r.dof = (2 * n - 2 * f - s) / 2;
  for (const auto& c : r.chain.constraints)
    if (!c.matched) r.notes.push_back("constraint " + render(c.label) + " has no normal form: " + render(c.normal));
  if (gauge) {
    auto it = in.gauges.find(*gauge);
    if (it == in.gauges.end()) throw Error(ErrorKind::Validation, "unknown gauge '" + *gauge + "'");
    r.fixed = fix_gauge(r.classification, it->second, r.legendre.space, in);
  }
  return r;
}

}  // namespace fjq
