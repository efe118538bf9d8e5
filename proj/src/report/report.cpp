#include "fjq/report.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

#include "fjq/error.hpp"
#include "json.hpp"

namespace fjq {

namespace {

using Json = nlohmann::ordered_json;

ConstraintLine line_of(const ConstraintRecord& c) {
  return {render(c.label), render(c.normal), render(c.factor), c.matched};
}

std::string method_of(const ModelSpec& m, const AnalyzeOptions& opt) { return opt.method.empty() ? m.method : opt.method; }

std::string reference_name(const std::string& method, const AnalyzeOptions& opt) {
  if (opt.gauge) return *opt.gauge;
  return method == "fj" ? "unfixed" : "second-class";
}

void fill_fj(Report& r, const ModelSpec& m, const AnalyzeOptions& opt) {
  if (m.initial.variables.empty()) throw Error(ErrorKind::Validation, "model " + m.name + " has no symplectic variables");
  FJResult res = run_fj(m.initial, m.fj, opt.gauge);
  for (const auto& l : res.levels) {
    LevelLine ll;
    ll.stage = l.stage;
    ll.rows = l.matrix.nrows();
    ll.cols = l.matrix.ncols();
    ll.modes = static_cast<int>(l.modes.size());
    ll.from_ansatz = l.from_ansatz;
    ll.weak_modes = l.weak_modes;
    ll.potential_vanishes = l.potential_vanishes;
    for (const auto& c : l.constraints) ll.constraints.push_back(line_of(c));
    r.levels.push_back(std::move(ll));
  }
  if (res.brackets) r.table = res.brackets->matrix;
  r.transformations = res.transformations;
  r.dof = res.dof;
  for (const auto& n : res.notes) r.notes.push_back(n);
  if (res.brackets && res.brackets->from_ansatz) r.notes.push_back("bracket table taken from the model ansatz inverse (verified exactly)");
}

void fill_dirac(Report& r, const ModelSpec& m, const AnalyzeOptions& opt) {
  if (m.dirac.lagrangian.is_zero()) throw Error(ErrorKind::Validation, "model " + m.name + " has no Lagrangian");
  DiracResult res = run_dirac(m.dirac, opt.gauge);
  std::map<int, LevelLine> stages;
  for (const auto& c : res.chain.constraints) {
    LevelLine& ll = stages[c.level];
    ll.stage = c.level == 0 ? "primary" : "secondary" + std::to_string(c.level);
    ll.constraints.push_back(line_of(c));
  }
  for (auto& [k, v] : stages) r.levels.push_back(std::move(v));
  auto summary = [](const std::string& stage, const Classification& c) {
    LevelLine ll;
    ll.stage = stage;
    ll.rows = c.pb.nrows();
    ll.cols = c.pb.ncols();
    ll.rank = c.rank;
    ll.block_rank = c.block_rank;
    for (const auto& x : c.first_class) ll.first_class.push_back(render(x.label) + " = " + render(x.normal));
    for (const auto& x : c.second_class) ll.second_class.push_back(render(x.label) + " = " + render(x.normal));
    return ll;
  };
  r.levels.push_back(summary("classification", res.classification));
  if (res.fixed) r.levels.push_back(summary("gauge " + *opt.gauge, res.fixed->classification));
  r.table = res.fixed ? res.fixed->table : res.table;
  r.dof = res.dof;
  for (const auto& n : res.classification.notes) r.notes.push_back(n);
  for (const auto& n : res.notes) r.notes.push_back(n);
}

std::string cell_text(const CellResidual& c) {
  return "{" + render(c.lhs) + ", " + render(c.rhs) + "}: expected " + render(c.expected) + ", got " + render(c.actual);
}

}  // namespace

std::vector<BracketCell> Report::brackets() const {
  std::vector<BracketCell> out;
  for (std::size_t i = 0; i < table.nrows(); ++i)
    for (std::size_t j = 0; j < table.ncols(); ++j)
      if (!table.at(i, j).is_zero()) out.push_back({table.rows()[i], table.cols()[j], table.at(i, j)});
  return out;
}

Report analyze(const ModelSpec& m, const AnalyzeOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  if (m.status == "unsupported") throw Error(ErrorKind::Unsupported, "model " + m.name + " is marked unsupported");
  Report r;
  r.model = m.name;
  r.method = method_of(m, opt);
  if (!opt.variables.empty() && opt.variables != m.variables_kind)
    throw Error(ErrorKind::Validation, "model " + m.name + " uses " + (m.variables_kind.empty() ? "unspecified" : m.variables_kind) +
                                           " variables, not " + opt.variables);
  if (r.method == "fj") fill_fj(r, m, opt);
  else if (r.method == "dirac") fill_dirac(r, m, opt);
  else throw Error(ErrorKind::UnknownName, "unknown method '" + r.method + "' (fj, dirac)");

  std::string ref = reference_name(r.method, opt);
  if (auto it = m.tables.find(ref); it != m.tables.end()) {
    Comparison c = compare_tables(r.table, reference_matrix(it->second));
    if (c.equivalent) r.notes.push_back("reference " + ref + ": " + std::to_string(c.cells) + " cells agree");
    else {
      r.notes.push_back("reference " + ref + ": " + std::to_string(c.residuals.size()) + " of " + std::to_string(c.cells) + " cells differ");
      for (const auto& x : c.residuals) r.notes.push_back("  " + cell_text(x));
    }
  }
  if (auto it = m.expected.find("dof"); it != m.expected.end() && r.dof) {
    bool ok = it->second == std::to_string(*r.dof);
    r.notes.push_back("expected dof " + it->second + (ok ? ": agrees" : ": differs"));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

KernelMatrix bracket_table(const ModelSpec& m, const AnalyzeOptions& opt) { return analyze(m, opt).table; }

std::string to_json(const Report& r) {
  Json j;
  j["model"] = r.model;
  j["method"] = r.method;
  j["levels"] = Json::array();
  for (const auto& l : r.levels) {
    Json x;
    x["stage"] = l.stage;
    x["dimension"] = {l.rows, l.cols};
    if (l.rank) x["rank"] = *l.rank;
    if (l.block_rank) x["block_rank"] = *l.block_rank;
    if (r.method == "fj") {
      x["modes"] = l.modes;
      x["from_ansatz"] = l.from_ansatz;
      x["weak_modes"] = l.weak_modes;
      x["potential_vanishes"] = l.potential_vanishes;
    }
    x["constraints"] = Json::array();
    for (const auto& c : l.constraints)
      x["constraints"].push_back({{"label", c.label}, {"expr", c.expr}, {"factor", c.factor}, {"matched", c.matched}});
    if (l.rank) {
      x["first_class"] = l.first_class;
      x["second_class"] = l.second_class;
    }
    j["levels"].push_back(std::move(x));
  }
  j["brackets"] = Json::array();
  for (const auto& b : r.brackets()) j["brackets"].push_back({{"lhs", render(b.lhs)}, {"rhs", render(b.rhs)}, {"kernel", render(b.kernel)}});
  j["gauge_transformations"] = Json::array();
  for (const auto& t : r.transformations) j["gauge_transformations"].push_back({{"field", render(t.field)}, {"delta", render(t.delta)}});
  j["dof"] = r.dof ? Json(*r.dof) : Json(nullptr);
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

std::string to_text(const Report& r) {
  std::ostringstream o;
  o << "model: " << r.model << "\nmethod: " << r.method << "\n";
  for (const auto& l : r.levels) {
    o << "\n[" << l.stage << "] " << l.rows << "x" << l.cols;
    if (r.method == "fj") o << ", " << l.modes << " zero modes" << (l.from_ansatz ? " (ansatz" : "") << (l.from_ansatz && l.weak_modes ? ", weak)" : l.from_ansatz ? ")" : "");
    if (l.rank) o << ", rank " << *l.rank << " (" << *l.block_rank << " blocks)";
    if (l.potential_vanishes) o << ", potential vanishes";
    o << "\n";
    for (const auto& c : l.constraints)
      o << "  " << c.label << " = " << c.expr << (c.matched && c.factor != "1" ? "  (factor " + c.factor + ")" : "")
        << (c.matched ? "" : "  (unmatched)") << "\n";
    if (l.rank) {
      o << "  first class:\n";
      for (const auto& x : l.first_class) o << "    " << x << "\n";
      o << "  second class:\n";
      for (const auto& x : l.second_class) o << "    " << x << "\n";
    }
  }
  o << "\nbrackets:\n";
  for (const auto& b : r.brackets()) o << "  {" << render(b.lhs) << ", " << render(b.rhs) << "} = " << render(b.kernel) << "\n";
  if (!r.transformations.empty()) {
    o << "\ngauge transformations:\n";
    for (const auto& t : r.transformations) o << "  delta " << render(t.field) << " = " << render(t.delta) << "\n";
  }
  o << "\ndof: " << (r.dof ? std::to_string(*r.dof) : "n/a") << "\n";
  if (!r.notes.empty()) {
    o << "\nnotes:\n";
    for (const auto& n : r.notes) o << "  " << n << "\n";
  }
  std::ostringstream t;
  t.precision(3);
  t << std::fixed << r.seconds;
  o << "\ntime: " << t.str() << " s\n";
  return o.str();
}

KernelMatrix reference_matrix(const std::vector<ExpectedCell>& cells) {
  std::vector<Label> labels;
  auto note = [&](const Label& l) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  };
  for (const auto& c : cells) {
    note(c.row);
    note(c.col);
  }
  KernelMatrix m(labels, labels);
  std::set<std::pair<int, int>> given;
  for (const auto& c : cells) {
    int i = m.row_index(c.row), j = m.col_index(c.col);
    m.at(i, j) = c.kernel;
    given.insert({i, j});
  }
  for (const auto& c : cells) {
    int i = m.row_index(c.row), j = m.col_index(c.col);
    if (!given.count({j, i})) m.at(j, i) = -adjoint(c.kernel);
  }
  return m;
}

Comparison compare_tables(const KernelMatrix& actual, const KernelMatrix& expected) {
  Comparison c;
  std::vector<std::pair<std::size_t, int>> rows, cols;
  for (std::size_t i = 0; i < expected.nrows(); ++i) {
    int k = actual.row_index(expected.rows()[i]);
    if (k < 0) c.unmatched.push_back(expected.rows()[i]);
    else rows.emplace_back(i, k);
  }
  for (std::size_t j = 0; j < expected.ncols(); ++j) {
    int k = actual.col_index(expected.cols()[j]);
    if (k >= 0) cols.emplace_back(j, k);
  }
  for (const auto& [i, ai] : rows)
    for (const auto& [j, aj] : cols) {
      ++c.cells;
      const OperatorEntry& want = expected.at(i, j);
      const OperatorEntry& got = actual.at(static_cast<std::size_t>(ai), static_cast<std::size_t>(aj));
      if (!(want == got)) c.residuals.push_back({expected.rows()[i], expected.cols()[j], want, got});
    }
  c.equivalent = c.residuals.empty() && c.cells > 0;
  if (!c.unmatched.empty()) {
    std::string s = "labels without a counterpart:";
    for (const auto& l : c.unmatched) s += " " + render(l);
    c.notes.push_back(s);
  }
  return c;
}

KernelMatrix extend_table(const KernelMatrix& t, const std::map<Label, Expr>& defs) {
  std::vector<Label> labels = t.rows();
  std::vector<Expr> exprs;
  for (const auto& l : labels) exprs.push_back(Expr::symbol(l));
  for (const auto& [l, e] : defs)
    if (t.row_index(l) < 0) {
      labels.push_back(l);
      exprs.push_back(e);
    }
  KernelMatrix out(labels, labels);
  std::size_t n = t.nrows();
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j)
      out.at(i, j) = (i < n && j < n) ? t.at(i, j) : bracket_of(exprs[i], exprs[j], t);
  return out;
}

std::map<Label, Expr> strong_second_class_map(const ModelSpec& dm) {
  DiracResult res = run_dirac(dm.dirac, std::nullopt);
  std::set<std::string> momenta = res.legendre.space.momentum_names();
  auto is_momentum = [&](const Symbol& s) { return momenta.count(s.name) > 0; };
  std::map<Label, Expr> out;
  for (const auto& c : res.classification.second_class) {
    std::optional<Symbol> lead;
    Expr coef, rest;
    bool ok = true;
    for (const auto& [m, q] : c.normal.terms()) {
      bool mom = std::any_of(m.fields.begin(), m.fields.end(), is_momentum);
      if (!mom) {
        rest += Expr::term(m, q);
        continue;
      }
      if (lead || m.fields.size() != 1 || m.fields[0].has_tags()) ok = false;
      else {
        lead = m.fields[0];
        Monomial pm;
        pm.params = m.params;
        coef = Expr::term(pm, q);
      }
    }
    if (!ok || !lead) throw Error(ErrorKind::Unsupported, "second-class constraint " + render(c.label) + " cannot be solved for a momentum");
    out[*lead] = -(coef.inverse_monomial() * rest);
  }
  return out;
}

Comparison compare(const CompareSide& a, const std::optional<CompareSide>& b, const std::string& map) {
  static const std::set<std::string> maps{"none", "strong-second-class", "momentum-map"};
  if (!maps.count(map)) throw Error(ErrorKind::UnknownName, "unknown map '" + map + "' (none, strong-second-class, momentum-map)");
  auto reference = [&](const std::string& name) {
    auto it = a.model->tables.find(name);
    if (it == a.model->tables.end()) throw Error(ErrorKind::Validation, "model " + a.model->name + " has no reference table '" + name + "'");
    return reference_matrix(it->second);
  };
  Comparison c;
  if (map == "strong-second-class") {
    if (!b) throw Error(ErrorKind::Validation, "strong-second-class needs a second model");
    bool a_dirac = method_of(*a.model, a.opt) == "dirac";
    const CompareSide& dirac = a_dirac ? a : *b;
    const CompareSide& other = a_dirac ? *b : a;
    if (method_of(*dirac.model, dirac.opt) != "dirac") throw Error(ErrorKind::Validation, "strong-second-class needs one Dirac run");
    KernelMatrix fj = extend_table(bracket_table(*other.model, other.opt), strong_second_class_map(*dirac.model));
    c = compare_tables(fj, bracket_table(*dirac.model, dirac.opt));
  } else {
    KernelMatrix ta = bracket_table(*a.model, a.opt);
    if (map == "momentum-map") {
      auto it = a.model->maps.find("momentum-map");
      if (it == a.model->maps.end()) throw Error(ErrorKind::Validation, "model " + a.model->name + " defines no momentum-map");
      ta = extend_table(ta, it->second);
    }
    KernelMatrix tb = b ? bracket_table(*b->model, b->opt)
                        : reference(map == "momentum-map" ? "momentum-map" : reference_name(method_of(*a.model, a.opt), a.opt));
    c = compare_tables(ta, tb);
  }
  return c;
}

std::string to_json(const Comparison& c, const std::string& map) {
  Json j;
  j["map"] = map;
  j["equivalent"] = c.equivalent;
  j["cells"] = c.cells;
  j["residuals"] = Json::array();
  for (const auto& r : c.residuals)
    j["residuals"].push_back({{"lhs", render(r.lhs)}, {"rhs", render(r.rhs)}, {"expected", render(r.expected)}, {"actual", render(r.actual)},
                              {"residual", render(r.actual - r.expected)}});
  j["unmatched"] = Json::array();
  for (const auto& l : c.unmatched) j["unmatched"].push_back(render(l));
  j["notes"] = c.notes;
  return j.dump(2) + "\n";
}

std::string to_text(const Comparison& c, const std::string& map) {
  std::ostringstream o;
  o << "map: " << map << "\n" << (c.equivalent ? "equivalent" : "not equivalent") << " (" << c.cells << " cells compared, "
    << c.residuals.size() << " differ)\n";
  for (const auto& r : c.residuals) o << "  " << cell_text(r) << "\n";
  for (const auto& n : c.notes) o << "note: " << n << "\n";
  return o.str();
}

}  // namespace fjq
