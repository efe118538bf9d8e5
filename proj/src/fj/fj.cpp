#include "fjq/fj.hpp"

#include <algorithm>

#include "fjq/error.hpp"

namespace fjq {

std::optional<Expr> proportionality(const Expr& expr, const Expr& nf) {
  if (nf.is_zero() || expr.is_zero()) return std::nullopt;
  const auto& [m0, a0] = *nf.terms().begin();
  for (const auto& [m1, a1] : expr.terms()) {
    if (m1.fields != m0.fields) continue;
    Monomial pm;
    std::map<std::string, int> pw;
    for (const auto& [n, k] : m1.params) pw[n] += k;
    for (const auto& [n, k] : m0.params) pw[n] -= k;
    for (const auto& [n, k] : pw)
      if (k) pm.params.emplace_back(n, k);
    Expr f = Expr::term(pm, a1 / a0);
    if (f * nf == expr) return f;
    return std::nullopt;
  }
  return std::nullopt;
}

ConstraintRecord classify_constraint(const Expr& derived, const std::vector<NormalForm>& forms,
                                     const std::optional<Label>& origin, int level, int serial) {
  ConstraintRecord r;
  r.derived = derived;
  r.normal = derived;
  r.origin = origin;
  r.level = level;
  for (const auto& nf : forms) {
    if (auto f = proportionality(derived, nf.expr)) {
      r.label = nf.label;
      r.normal = nf.expr;
      r.factor = *f;
      r.matched = true;
      return r;
    }
  }
  if (origin) r.label = Label("C_" + origin->name, origin->internal, origin->spatial);
  else r.label = Label("C" + std::to_string(serial));
  return r;
}

Expr SymplecticSystem::one_form(const Label& l) const {
  auto it = one_forms.find(l);
  return it == one_forms.end() ? Expr() : it->second;
}

int SymplecticSystem::dynamical_count() const {
  int n = 0;
  for (const auto& v : variables)
    if (!multipliers.count(v) && !gauge_multipliers.count(v)) ++n;
  return n;
}

KernelMatrix symplectic_matrix(const std::vector<Label>& vars, const std::map<Label, Expr>& one_forms) {
  std::size_t n = vars.size();
  std::vector<std::vector<OperatorEntry>> lin(n, std::vector<OperatorEntry>(n));
  for (std::size_t j = 0; j < n; ++j) {
    auto it = one_forms.find(vars[j]);
    if (it == one_forms.end() || it->second.is_zero()) continue;
    for (std::size_t i = 0; i < n; ++i) lin[j][i] = linearization(it->second, vars[i]);
  }
  KernelMatrix f(vars, vars);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f.at(i, j) = adjoint(lin[j][i]) - lin[i][j];
  return f;
}

KernelMatrix symplectic_matrix(const SymplecticSystem& s) { return symplectic_matrix(s.variables, s.one_forms); }

namespace {

std::vector<const ConstraintRecord*> pending(const SymplecticSystem& s) {
  std::vector<const ConstraintRecord*> out;
  for (const auto& c : s.constraints)
    if (!s.attached.count(c.label)) out.push_back(&c);
  return out;
}

std::vector<Expr> potential_gradient(const SymplecticSystem& s) {
  std::vector<Expr> z;
  for (const auto& v : s.variables) z.push_back(functional_derivative(s.potential, v));
  return z;
}

}  // namespace

KernelMatrix consistency_matrix(const SymplecticSystem& s) {
  KernelMatrix f = symplectic_matrix(s);
  auto cs = pending(s);
  std::vector<Label> rows = s.variables;
  for (const auto* c : cs) rows.push_back(c->label);
  KernelMatrix m(rows, s.variables);
  for (std::size_t i = 0; i < f.nrows(); ++i)
    for (std::size_t j = 0; j < f.ncols(); ++j) m.at(i, j) = f.at(i, j);
  for (std::size_t k = 0; k < cs.size(); ++k)
    for (std::size_t j = 0; j < s.variables.size(); ++j)
      m.at(f.nrows() + k, j) = linearization(cs[k]->normal, s.variables[j]);
  return m;
}

ModeVector mode_from_ansatz(const AnsatzMode& a, const std::vector<Label>& rows) {
  ModeVector mv;
  mv.rows = rows;
  std::map<Symbol, std::vector<std::map<Multi, Expr>>> acc;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto it = a.components.find(rows[i]);
    if (it == a.components.end()) continue;
    for (const auto& [m, q] : it->second.terms()) {
      int hit = -1;
      for (std::size_t p = 0; p < m.fields.size(); ++p)
        if (m.fields[p].name.rfind("v_", 0) == 0) {
          if (hit >= 0) throw Error(ErrorKind::Validation, "mode component is not linear in the arbitrary functions");
          hit = static_cast<int>(p);
        }
      if (hit < 0) throw Error(ErrorKind::Validation, "mode component term without an arbitrary function: " + render(it->second));
      const Symbol& f = m.fields[hit];
      if (f.tags[0]) throw Error(ErrorKind::Validation, "time derivative of an arbitrary function in a mode");
      Monomial rest = m;
      rest.fields.erase(rest.fields.begin() + hit);
      auto& slot = acc[f.base()];
      slot.resize(rows.size());
      slot[i][{f.tags[1], f.tags[2]}] += Expr::term(rest, q);
    }
  }
  for (auto& [f, comps] : acc) {
    std::vector<OperatorEntry> ops;
    for (auto& c : comps) ops.push_back(OperatorEntry::from_parts(std::move(c), 0));
    mv.parts[f] = std::move(ops);
  }
  return mv;
}

std::vector<ModeVector> zero_modes(const KernelMatrix& m, const std::string& stage, const FJModelData& d, bool* from_ansatz,
                                   const WeakReducer* weak) {
  if (from_ansatz) *from_ansatz = false;
  if (m.is_constant()) return left_null_space(m);
  auto it = d.ansatz_modes.find(stage);
  if (it == d.ansatz_modes.end())
    throw Error(ErrorKind::NeedsAnsatz, "matrix at stage " + stage + " is field-dependent and no ansatz modes were supplied");
  ModeVector mv = mode_from_ansatz(it->second, m.rows());
  auto res = verify_mode(m, mv);
  if (weak)
    for (auto& col : res)
      std::erase_if(col, [&](const auto& kv) { return kv.second.map_coeffs([&](const Expr& c) { return weak->reduce(c); }).is_zero(); });
  for (std::size_t j = 0; j < res.size(); ++j)
    if (!res[j].empty())
      throw Error(ErrorKind::Validation, "ansatz modes for stage " + stage + " leave residual " + render(res[j].begin()->second) +
                                             " in column " + render(m.cols()[j]) + " for " + render(res[j].begin()->first));
  if (from_ansatz) *from_ansatz = true;
  return {mv};
}

WeakReducer reducer_for(const std::vector<ConstraintRecord>& cs) {
  WeakReducer r;
  for (const auto& c : cs) r.add(c.normal);
  return r;
}

std::vector<ConstraintRecord> constraints_from_modes(const SymplecticSystem& s, const std::vector<ModeVector>& modes,
                                                     const std::vector<Expr>& z, const FJModelData& d) {
  WeakReducer red = reducer_for(s.constraints);
  std::vector<ConstraintRecord> out;
  int serial = static_cast<int>(s.constraints.size());
  for (const auto& mv : modes)
    for (const auto& [f, dens] : mv.contract(z)) {
      Expr r = red.reduce(dens);
      if (r.is_zero()) continue;
      std::optional<Label> origin;
      if (f.name.rfind("v_", 0) == 0) {
        Label o(f.name.substr(2), f.internal, f.spatial);
        if (std::find(s.variables.begin(), s.variables.end(), o) != s.variables.end()) origin = o;
      }
      ConstraintRecord rec = classify_constraint(r, d.normal_forms, origin, s.level, serial++);
      red.add(rec.normal);
      out.push_back(std::move(rec));
    }
  return out;
}

ConsistencyResult consistency_step(const SymplecticSystem& s, const FJModelData& d) {
  ConsistencyResult res;
  res.matrix = consistency_matrix(s);
  res.modes = zero_modes(res.matrix, "consistency" + std::to_string(s.level), d, &res.from_ansatz);
  std::vector<Expr> z = potential_gradient(s);
  z.resize(res.matrix.nrows());
  res.new_constraints = constraints_from_modes(s, res.modes, z, d);
  res.terminated = res.new_constraints.empty();
  return res;
}

SymplecticSystem augment(const SymplecticSystem& s, const FJModelData& d) {
  SymplecticSystem r = s;
  r.level = s.level + 1;
  std::map<Label, Label> placed;
  std::vector<Label> unplaced;
  for (const auto* c : pending(s)) {
    auto it = d.multiplier_names.find(c->label.name);
    std::string name = it != d.multiplier_names.end() ? it->second : "mu_" + c->label.name;
    Label m(name, c->label.internal, c->label.spatial);
    r.one_forms[m] += c->normal;
    r.multipliers.insert(m);
    r.constraint_of[m] = c->label;
    r.attached.insert(c->label);
    if (c->origin && s.one_form(*c->origin).is_zero() && !placed.count(*c->origin)) {
      placed[*c->origin] = m;
      r.velocity_alias[*c->origin] = m;
    } else {
      unplaced.push_back(m);
    }
  }
  std::vector<Label> vars;
  for (const auto& v : s.variables) {
    vars.push_back(v);
    if (placed.count(v)) vars.push_back(placed[v]);
  }
  for (const auto& m : unplaced)
    if (std::find(vars.begin(), vars.end(), m) == vars.end()) vars.push_back(m);
  r.potential = reducer_for(r.constraints).reduce(s.potential);
  auto used = [&](const Label& v) {
    if (r.potential.depends_on_base(v)) return true;
    for (const auto& [k, a] : r.one_forms)
      if (a.depends_on_base(v)) return true;
    return false;
  };
  r.variables.clear();
  for (const auto& v : vars) {
    bool keep = r.multipliers.count(v) || r.gauge_multipliers.count(v) || !r.one_form(v).is_zero() || used(v);
    if (keep) r.variables.push_back(v);
    else r.one_forms.erase(v);
  }
  return r;
}

SymplecticSystem add_gauge(const SymplecticSystem& s, const GaugeSpec& g) {
  SymplecticSystem r = s;
  r.level = s.level + 1;
  auto alias = [&](const Symbol& b) -> std::optional<Expr> {
    auto it = s.velocity_alias.find(b);
    if (it == s.velocity_alias.end()) return std::nullopt;
    return Expr::symbol(it->second.derived(0));
  };
  for (const auto& gc : g.conditions) {
    Expr G = gc.condition.substitute(alias);
    const Label& psi = gc.multiplier;
    bool velocity = false;
    for (const auto& sym : G.symbols()) velocity = velocity || sym.tags[0] > 0;
    if (velocity) {
      Expr term = Expr::symbol(psi) * G;
      for (const auto& v : s.variables) {
        Expr coef = functional_derivative(term, v.derived(0));
        if (!coef.is_zero()) r.one_forms[v] += coef;
      }
    } else {
      r.one_forms[psi] += G;
    }
    r.variables.push_back(psi);
    r.gauge_multipliers.insert(psi);
    ConstraintRecord rec;
    rec.label = psi;
    rec.derived = rec.normal = gc.condition;
    r.gauge_conditions.push_back(rec);
  }
  return r;
}

std::vector<GaugeTransformation> gauge_transformations(const SymplecticSystem& s, const FJModelData& d) {
  std::vector<Label> xb;
  std::map<Label, Expr> forms;
  for (const auto& v : s.variables)
    if (!s.multipliers.count(v) && !s.gauge_multipliers.count(v)) {
      xb.push_back(v);
      forms[v] = s.one_form(v);
    }
  KernelMatrix fbar = symplectic_matrix(xb, forms);
  KernelMatrix g = invert_constant(fbar);
  std::vector<Expr> delta(xb.size());
  std::vector<GaugeTransformation> extra;
  for (const auto& v : s.variables) {
    if (!s.multipliers.count(v)) continue;
    const Label& c = s.constraint_of.at(v);
    auto it = d.gauge_parameter_names.find(c.name);
    std::string name = it != d.gauge_parameter_names.end() ? it->second : "eps_" + v.name;
    Expr eps = Expr::symbol(Symbol(name, v.internal, v.spatial));
    Expr phi = s.one_form(v);
    std::vector<OperatorEntry> col(xb.size());
    for (std::size_t j = 0; j < xb.size(); ++j) col[j] = adjoint(linearization(phi, xb[j]));
    for (std::size_t i = 0; i < xb.size(); ++i)
      for (std::size_t j = 0; j < xb.size(); ++j)
        if (!g.at(i, j).is_zero() && !col[j].is_zero()) delta[i] -= compose(g.at(i, j), col[j]).apply(eps);
    extra.push_back({v, eps});
    for (const auto& [u, m] : s.velocity_alias)
      if (m == v) extra.push_back({u, apply_partial(0, eps)});
  }
  std::vector<GaugeTransformation> out;
  for (std::size_t i = 0; i < xb.size(); ++i)
    if (!delta[i].is_zero()) out.push_back({xb[i], delta[i]});
  for (auto& e : extra) out.push_back(std::move(e));
  return out;
}

BracketTable generalized_brackets(const SymplecticSystem& s, const FJModelData& d, const std::string& gauge) {
  KernelMatrix f = symplectic_matrix(s);
  BracketTable t;
  if (f.is_constant()) {
    try {
      t.matrix = invert_constant(f);
    } catch (const SingularError& e) {
      std::string modes;
      for (const auto& m : e.modes()) modes += "\n  " + m.render();
      throw Error(ErrorKind::StillSingular, "symplectic matrix is still singular (rank " + std::to_string(e.rank()) + " of " +
                                                std::to_string(f.nrows()) + "); zero modes:" + modes);
    }
    return t;
  }
  auto it = d.ansatz_inverses.find(gauge);
  if (it == d.ansatz_inverses.end())
    throw Error(ErrorKind::NeedsAnsatz, "field-dependent symplectic matrix for gauge '" + gauge + "' needs an ansatz inverse");
  KernelMatrix n(f.cols(), f.rows());
  for (const auto& [key, op] : it->second) {
    int i = n.row_index(key.first), j = n.col_index(key.second);
    if (i < 0 || j < 0) throw Error(ErrorKind::Validation, "ansatz inverse names unknown variables " + render(key.first) + ", " + render(key.second));
    n.at(i, j) = op;
  }
  KernelMatrix res = verify_inverse(f, n);
  for (std::size_t i = 0; i < res.nrows(); ++i)
    for (std::size_t j = 0; j < res.ncols(); ++j)
      if (!res.at(i, j).is_zero())
        throw Error(ErrorKind::Validation, "ansatz inverse leaves residual " + render(res.at(i, j)) + " at (" +
                                               render(res.rows()[i]) + ", " + render(res.cols()[j]) + ")");
  t.matrix = n;
  t.from_ansatz = true;
  return t;
}

int count_dof(const SymplecticSystem& s, int gauge_components) {
  int diff = s.dynamical_count() - static_cast<int>(s.attached.size()) - gauge_components;
  if (diff % 2)
    throw Error(ErrorKind::InconsistentCount, "odd count: " + std::to_string(s.dynamical_count()) + " dynamical, " +
                                                  std::to_string(s.attached.size()) + " constraints, " +
                                                  std::to_string(gauge_components) + " gauge conditions");
  return diff / 2;
}

FJResult run_fj(const SymplecticSystem& initial, const FJModelData& d, const std::optional<std::string>& gauge) {
  FJResult res;
  SymplecticSystem s = initial;
  const int bound = static_cast<int>(initial.variables.size()) + 2;
  for (int round = 0; round <= bound; ++round) {
    LevelReport rep;
    rep.level = s.level;
    rep.stage = "level" + std::to_string(s.level);
    rep.matrix = symplectic_matrix(s);
    rep.potential_vanishes = s.potential.is_zero();
    WeakReducer weak = reducer_for(s.constraints);
    rep.modes = zero_modes(rep.matrix, rep.stage, d, &rep.from_ansatz, s.constraints.empty() ? nullptr : &weak);
    if (rep.from_ansatz && !s.constraints.empty() && !mode_annihilates(rep.matrix, rep.modes.front())) rep.weak_modes = true;
    if (rep.modes.empty()) {
      res.levels.push_back(rep);
      res.unfixed = s;
      res.brackets = generalized_brackets(s, d, "");
      res.dof = count_dof(s, 0);
      return res;
    }
    std::vector<Expr> z = potential_gradient(s);
    rep.constraints = constraints_from_modes(s, rep.modes, z, d);
    res.levels.push_back(rep);
    if (rep.constraints.empty()) {
      res.unfixed = s;
      try {
        res.transformations = gauge_transformations(s, d);
      } catch (const Error& e) {
        res.notes.push_back(std::string("gauge transformations not derived: ") + e.what());
      }
      int gauge_components = static_cast<int>(s.multipliers.size());
      if (gauge) {
        auto git = d.gauges.find(*gauge);
        if (git == d.gauges.end()) throw Error(ErrorKind::Validation, "unknown gauge '" + *gauge + "'");
        gauge_components = static_cast<int>(git->second.conditions.size());
        SymplecticSystem g = add_gauge(s, git->second);
        LevelReport fixed;
        fixed.level = g.level;
        fixed.stage = "gauge " + *gauge;
        fixed.matrix = symplectic_matrix(g);
        fixed.potential_vanishes = g.potential.is_zero();
        res.levels.push_back(fixed);
        res.brackets = generalized_brackets(g, d, *gauge);
        res.fixed = g;
      }
      res.dof = count_dof(s, gauge_components);
      return res;
    }
    for (auto& c : rep.constraints) s.constraints.push_back(c);
    for (int it = 0; it <= bound; ++it) {
      ConsistencyResult cr = consistency_step(s, d);
      LevelReport crep;
      crep.level = s.level;
      crep.stage = "consistency" + std::to_string(s.level);
      crep.matrix = cr.matrix;
      crep.modes = cr.modes;
      crep.constraints = cr.new_constraints;
      crep.from_ansatz = cr.from_ansatz;
      crep.potential_vanishes = s.potential.is_zero();
      res.levels.push_back(crep);
      if (cr.terminated) break;
      if (it == bound) throw Error(ErrorKind::IterationBound, "consistency iteration exceeded its bound");
      for (auto& c : cr.new_constraints) s.constraints.push_back(c);
    }
    s = augment(s, d);
  }
  throw Error(ErrorKind::IterationBound, "Faddeev-Jackiw iteration exceeded its bound");
}

}  // namespace fjq
