#include "fjq/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

namespace fjq {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string join_diags(const std::vector<Diagnostic>& d) {
  std::string out;
  for (const auto& x : d) {
    if (!out.empty()) out += "\n";
    out += std::to_string(x.line) + ":" + std::to_string(x.column) + ": " + x.message;
  }
  return out;
}

// One logical entry; continuation lines are joined with a single space.
struct Entry {
  std::string key, value;
  int line = 0, key_col = 1;
  // (offset in value, line, column) for each joined segment.
  std::vector<std::tuple<std::size_t, int, int>> segments;

  std::pair<int, int> locate(std::size_t off) const {
    auto seg = segments.front();
    for (const auto& s : segments)
      if (std::get<0>(s) <= off) seg = s;
    return {std::get<1>(seg), std::get<2>(seg) + static_cast<int>(off - std::get<0>(seg))};
  }
};

struct RawSection {
  std::string header;
  int line = 0;
  std::vector<Entry> entries;
};

bool has_key(const std::string& header) {
  return !(header == "variables" || header == "potential" || header == "lagrangian");
}

std::vector<RawSection> split_sections(const std::string& text, std::vector<Diagnostic>& diags) {
  std::vector<RawSection> out;
  std::istringstream in(text);
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    std::string line = raw;
    if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
    if (trim(line).empty()) continue;
    bool cont = std::isspace(static_cast<unsigned char>(line[0])) != 0;
    std::string t = trim(line);
    int first_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
    if (!cont && t.front() == '[') {
      if (t.back() != ']') {
        diags.push_back({ln, first_col, "unterminated section header"});
        continue;
      }
      out.push_back({trim(t.substr(1, t.size() - 2)), ln, {}});
      continue;
    }
    if (out.empty()) {
      diags.push_back({ln, first_col, "entry outside of any section"});
      continue;
    }
    auto& sec = out.back();
    if (cont && !sec.entries.empty()) {
      Entry& e = sec.entries.back();
      e.value += " ";
      e.segments.emplace_back(e.value.size(), ln, first_col);
      e.value += t;
      continue;
    }
    Entry e;
    e.line = ln;
    e.key_col = first_col;
    std::size_t eq = has_key(sec.header) ? line.find('=') : std::string::npos;
    if (eq == std::string::npos) {
      e.value = t;
      e.segments.emplace_back(0, ln, first_col);
    } else {
      e.key = trim(line.substr(0, eq));
      std::string v = line.substr(eq + 1);
      std::size_t vs = v.find_first_not_of(" \t");
      e.value = trim(v);
      e.segments.emplace_back(0, ln, static_cast<int>(eq + 2 + (vs == std::string::npos ? 0 : vs)));
    }
    sec.entries.push_back(std::move(e));
  }
  return out;
}

class Builder {
 public:
  Builder(const std::string& source) : source_(source) {}

  ModelSpec build(const std::string& text) {
    raw_ = split_sections(text, diags_);
    for (const auto& s : raw_) {
      ModelSection ms{s.header, s.line, {}};
      for (const auto& e : s.entries) ms.lines.emplace_back(e.line, e.key.empty() ? e.value : e.key + " = " + e.value);
      m_.sections.push_back(std::move(ms));
    }
    header();
    declarations();
    if (m_.status == "supported" || m_.status.empty()) contents();
    if (!diags_.empty()) throw ValidationError(diags_);
    return std::move(m_);
  }

 private:
  const RawSection* find(const std::string& h) const {
    for (const auto& s : raw_)
      if (s.header == h) return &s;
    return nullptr;
  }

  std::vector<const RawSection*> with_prefix(const std::string& p) const {
    std::vector<const RawSection*> out;
    for (const auto& s : raw_)
      if (s.header.rfind(p, 0) == 0) out.push_back(&s);
    return out;
  }

  void diag(const Entry& e, std::size_t off, const std::string& msg) {
    auto [l, c] = e.locate(off);
    diags_.push_back({l, c, msg});
  }

  void header() {
    const RawSection* s = find("model");
    if (!s) {
      diags_.push_back({1, 1, "missing [model] section"});
      return;
    }
    for (const auto& e : s->entries) {
      if (e.key == "name") m_.name = e.value;
      else if (e.key == "method") m_.method = e.value;
      else if (e.key == "variables") m_.variables_kind = e.value;
      else if (e.key == "status") m_.status = e.value;
      else if (e.key == "description") m_.description = e.value;
      else diags_.push_back({e.line, e.key_col, "unknown model key '" + e.key + "'"});
    }
    if (m_.name.empty()) diags_.push_back({s->line, 1, "model has no name"});
    if (m_.method != "fj" && m_.method != "dirac") diags_.push_back({s->line, 1, "unknown method '" + m_.method + "'"});
    if (m_.status != "supported" && m_.status != "unsupported")
      diags_.push_back({s->line, 1, "status must be supported or unsupported"});
  }

  std::optional<VariableDecl> declaration(const Entry& e, const std::string& text, int col) {
    try {
      return parse_declaration(text, e.line, col);
    } catch (const ParseError& p) {
      diags_.push_back({p.line(), p.column(), strip_position(p.what())});
      return std::nullopt;
    }
  }

  static std::string strip_position(const std::string& what) {
    static const std::regex pos(R"(^\d+:\d+: )");
    return std::regex_replace(what, pos, "");
  }

  void declare(const std::string& name, FieldDecl d) {
    d.name = name;
    m_.ctx.fields[name] = d;
    known_.insert(name);
  }

  void declarations() {
    if (const RawSection* s = find("parameters"))
      for (const auto& e : s->entries) {
        try {
          m_.parameters[e.key] = Rational(e.value);
          m_.parameters[e.key].canonicalize();
          m_.ctx.params.insert(e.key);
        } catch (const std::exception&) {
          diag(e, 0, "parameter value must be a rational number");
        }
      }
    if (!m_.parameters.count("Lambda")) m_.parameters["Lambda"] = 2;
    if (const RawSection* s = find("variables"))
      for (const auto& e : s->entries) {
        auto d = declaration(e, e.value, e.key_col);
        if (!d) continue;
        if (m_.ctx.fields.count(d->field.name)) {
          auto& old = m_.ctx.fields[d->field.name];
          if (old.has_internal != d->field.has_internal || old.has_spatial != d->field.has_spatial)
            diag(e, 0, "inconsistent index structure for " + d->field.name);
        } else {
          declare(d->field.name, d->field);
        }
        for (const auto& c : d->components()) components_.push_back(c);
      }
    if (const RawSection* s = find("momenta"))
      for (const auto& e : s->entries) {
        auto it = m_.ctx.fields.find(e.key);
        if (it == m_.ctx.fields.end()) {
          diags_.push_back({e.line, e.key_col, "undeclared symbol " + e.key});
          continue;
        }
        FieldDecl d = it->second;
        d.internal_up = !d.internal_up;
        declare(e.value, d);
        m_.dirac.momentum_names[e.key] = e.value;
      }
    // Constraint labels, multipliers and gauge parameters share index shapes.
    auto& shapes = shapes_;
    if (const RawSection* s = find("constraints"))
      for (const auto& e : s->entries) {
        auto d = declaration(e, e.key, e.key_col);
        if (!d) continue;
        d->field.variance_known = false;
        shapes[d->field.name] = d->field;
        label_names_.insert(d->field.name);
      }
    for (auto [sec, target] : {std::pair{"multipliers", &m_.fj.multiplier_names}, {"gauge_parameters", &m_.fj.gauge_parameter_names}}) {
      if (const RawSection* s = find(sec))
        for (const auto& e : s->entries) {
          if (!shapes.count(e.key)) {
            diags_.push_back({e.line, e.key_col, "unknown constraint " + e.key});
            continue;
          }
          (*target)[e.key] = e.value;
          declare(e.value, shapes[e.key]);
        }
    }
    for (const auto* s : with_prefix("gauges."))
      for (const auto& e : s->entries) {
        auto d = declaration(e, e.key, e.key_col);
        if (!d) continue;
        d->field.variance_known = false;
        declare(d->field.name, d->field);
      }
    for (const auto* s : with_prefix("maps."))
      for (const auto& e : s->entries) {
        auto d = declaration(e, e.key, e.key_col);
        if (d && !m_.ctx.fields.count(d->field.name)) declare(d->field.name, d->field);
      }
  }

  struct Parsed {
    NodePtr node;
    std::vector<FreeIndex> frees;
  };

  std::optional<Parsed> expression(const Entry& e) {
    try {
      NodePtr n = parse(e.value, m_.ctx, 1, 1);
      auto frees = analyze(*n);
      if (!check_symbols(e, *n)) return std::nullopt;
      return Parsed{n, frees};
    } catch (const ParseError& p) {
      diag(e, static_cast<std::size_t>(std::max(0, p.column() - 1)), strip_position(p.what()));
    } catch (const Error& x) {
      std::smatch mm;
      std::string w = x.what();
      static const std::regex pos(R"(^(\d+):(\d+): (.*)$)");
      if (std::regex_match(w, mm, pos)) diag(e, std::stoul(mm[2]) - 1, mm[3]);
      else diag(e, 0, w);
    }
    return std::nullopt;
  }

  bool check_symbols(const Entry& e, const Node& n) {
    if (n.kind == Node::Field && !known_.count(n.name) && n.name.rfind("v_", 0) != 0) {
      diag(e, static_cast<std::size_t>(n.column - 1), "undeclared symbol " + n.name);
      return false;
    }
    for (const auto& k : n.kids)
      if (!check_symbols(e, *k)) return false;
    return true;
  }

  // Binds lhs index names, requiring rhs free indices to be among them
  // (exactly them when exact is set).
  bool frees_ok(const Entry& e, const std::vector<FreeIndex>& frees, const std::set<std::string>& names, bool exact) {
    std::set<std::string> f;
    for (const auto& x : frees) f.insert(x.name);
    for (const auto& x : f)
      if (!names.count(x)) {
        diag(e, 0, "free index " + x + " does not appear on the left-hand side");
        return false;
      }
    if (exact)
      for (const auto& x : names)
        if (!f.count(x)) {
          diag(e, 0, "left-hand index " + x + " does not appear on the right-hand side");
          return false;
        }
    return true;
  }

  static std::vector<std::pair<std::string, IndexKind>> lhs_indices(const VariableDecl& d) {
    std::vector<std::pair<std::string, IndexKind>> out;
    if (!d.internal_name.empty()) out.emplace_back(d.internal_name, IndexKind::Internal);
    if (!d.spatial_name.empty()) out.emplace_back(d.spatial_name, index_kind_of(d.spatial_name));
    return out;
  }

  static std::vector<Binding> bindings_for(const std::vector<std::pair<std::string, IndexKind>>& idx) {
    std::vector<FreeIndex> frees;
    for (const auto& [n, k] : idx) frees.push_back({n, k, 0});
    return enumerate_bindings(frees);
  }

  static Label label_of(const VariableDecl& d, const Binding& b) {
    Label l(d.field.name);
    if (d.field.has_internal) l.internal = b.at(d.internal_name);
    if (d.field.has_spatial) l.spatial = d.spatial_value >= 0 ? d.spatial_value : b.at(d.spatial_name);
    return l;
  }

  bool shape_ok(const Entry& e, const VariableDecl& d, bool must_be_variable) {
    auto it = m_.ctx.fields.find(d.field.name);
    if (it == m_.ctx.fields.end()) it = shapes_.find(d.field.name);
    if (it == shapes_.end()) {
      diags_.push_back({e.line, e.key_col, "undeclared symbol " + d.field.name});
      return false;
    }
    if (it->second.has_internal != d.field.has_internal || it->second.has_spatial != d.field.has_spatial) {
      diags_.push_back({e.line, e.key_col, "index shape of " + d.field.name + " does not match its declaration"});
      return false;
    }
    if (must_be_variable && !std::any_of(components_.begin(), components_.end(), [&](const Label& c) { return c.name == d.field.name; })) {
      diags_.push_back({e.line, e.key_col, d.field.name + " is not a variable"});
      return false;
    }
    return true;
  }

  // lhs = rhs definitions keyed by a single component pattern.
  template <class F>
  void definitions(const RawSection& s, bool check_shape, bool exact, F&& sink) {
    for (const auto& e : s.entries) {
      auto d = declaration(e, e.key, e.key_col);
      if (!d) continue;
      if (check_shape && !shape_ok(e, *d, false)) continue;
      auto p = expression(e);
      if (!p) continue;
      auto idx = lhs_indices(*d);
      std::set<std::string> names;
      for (const auto& [n, k] : idx) names.insert(n);
      if (!frees_ok(e, p->frees, names, exact)) continue;
      for (const auto& b : bindings_for(idx)) sink(label_of(*d, b), expand_expr(*p->node, b));
    }
  }

  Expr scalar_block(const RawSection* s) {
    Expr total;
    if (!s) return total;
    for (const auto& e : s->entries) {
      auto p = expression(e);
      if (!p) continue;
      if (!p->frees.empty()) {
        diag(e, 0, "free index " + p->frees.front().name + " in a scalar density");
        continue;
      }
      total += expand_expr(*p->node);
    }
    return total;
  }

  // "L1 L2 = op" cells.
  template <class F>
  void cells(const RawSection& s, F&& sink) {
    for (const auto& e : s.entries) {
      std::size_t depth = 0, cut = std::string::npos;
      for (std::size_t i = 0; i < e.key.size(); ++i) {
        if (e.key[i] == '(') ++depth;
        else if (e.key[i] == ')') --depth;
        else if (std::isspace(static_cast<unsigned char>(e.key[i])) && depth == 0) {
          cut = i;
          break;
        }
      }
      if (cut == std::string::npos) {
        diags_.push_back({e.line, e.key_col, "expected two labels before '='"});
        continue;
      }
      auto a = declaration(e, e.key.substr(0, cut), e.key_col);
      auto b = declaration(e, trim(e.key.substr(cut)), e.key_col + static_cast<int>(cut) + 1);
      if (!a || !b) continue;
      if (!shape_ok(e, *a, false) || !shape_ok(e, *b, false)) continue;
      auto p = expression(e);
      if (!p) continue;
      auto idx = lhs_indices(*a);
      for (const auto& x : lhs_indices(*b)) {
        if (std::any_of(idx.begin(), idx.end(), [&](const auto& y) { return y.first == x.first; })) {
          diags_.push_back({e.line, e.key_col, "index " + x.first + " repeated across labels"});
          idx.clear();
          break;
        }
        idx.push_back(x);
      }
      std::set<std::string> names;
      for (const auto& [n, k] : idx) names.insert(n);
      if (!frees_ok(e, p->frees, names, false)) continue;
      for (const auto& bind : bindings_for(idx)) {
        OperatorEntry op = expand_op(*p->node, bind);
        if (!op.is_zero()) sink(label_of(*a, bind), label_of(*b, bind), op);
      }
    }
  }

  void contents() {
    m_.initial.variables = components_;
    if (const RawSection* s = find("one_forms"))
      definitions(*s, true, true, [&](const Label& l, Expr x) {
        if (std::find(components_.begin(), components_.end(), l) == components_.end()) return;
        if (!x.is_zero()) m_.initial.one_forms[l] = std::move(x);
      });
    m_.initial.potential = scalar_block(find("potential"));
    m_.dirac.fields = components_;
    m_.dirac.lagrangian = scalar_block(find("lagrangian"));
    if (const RawSection* s = find("constraints"))
      definitions(*s, false, true, [&](const Label& l, Expr x) {
        m_.fj.normal_forms.push_back({l, x});
        m_.dirac.normal_forms.push_back({l, std::move(x)});
      });
    for (const auto* s : with_prefix("gauges.")) {
      std::string name = s->header.substr(7);
      GaugeSpec g{name, {}};
      definitions(*s, false, true, [&](const Label& l, Expr x) {
        g.conditions.push_back({l, x});
        m_.dirac.gauges[name].push_back({l, std::move(x)});
      });
      m_.fj.gauges[name] = std::move(g);
    }
    for (const auto* s : with_prefix("ansatz.modes.")) {
      AnsatzMode a;
      definitions(*s, true, false, [&](const Label& l, Expr x) {
        if (!x.is_zero()) a.components[l] = std::move(x);
      });
      m_.fj.ansatz_modes[s->header.substr(13)] = std::move(a);
    }
    for (const auto* s : with_prefix("ansatz.inverse.")) {
      auto& slot = m_.fj.ansatz_inverses[s->header.substr(15)];
      cells(*s, [&](const Label& a, const Label& b, OperatorEntry op) { slot[{a, b}] = std::move(op); });
    }
    for (const auto* s : with_prefix("reference.")) {
      auto& slot = m_.tables[s->header.substr(10)];
      cells(*s, [&](const Label& a, const Label& b, OperatorEntry op) { slot.push_back({a, b, std::move(op)}); });
    }
    for (const auto* s : with_prefix("transformations.")) {
      auto& slot = m_.transformations[s->header.substr(16)];
      definitions(*s, true, false, [&](const Label& l, Expr x) { slot.push_back({l, std::move(x)}); });
    }
    for (const auto* s : with_prefix("maps.")) {
      auto& slot = m_.maps[s->header.substr(5)];
      definitions(*s, true, true, [&](const Label& l, Expr x) { slot[l] = std::move(x); });
    }
    if (const RawSection* s = find("expected"))
      for (const auto& e : s->entries) m_.expected[e.key] = e.value;
    for (const auto& s : raw_) {
      static const std::set<std::string> plain{"model", "parameters", "variables", "momenta", "one_forms", "potential",
                                               "lagrangian", "constraints", "multipliers", "gauge_parameters", "expected"};
      static const std::vector<std::string> prefixed{"gauges.", "ansatz.modes.", "ansatz.inverse.", "reference.", "transformations.", "maps."};
      bool ok = plain.count(s.header) > 0;
      for (const auto& p : prefixed) ok = ok || (s.header.rfind(p, 0) == 0 && s.header.size() > p.size());
      if (!ok) diags_.push_back({s.line, 1, "unknown section [" + s.header + "]"});
    }
    if (m_.method == "fj" && components_.empty()) diags_.push_back({1, 1, "model declares no variables"});
  }

  std::string source_;
  std::vector<RawSection> raw_;
  std::vector<Diagnostic> diags_;
  ModelSpec m_;
  std::vector<Label> components_;
  std::set<std::string> known_;
  std::set<std::string> label_names_;
  std::map<std::string, FieldDecl> shapes_;
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diags)
    : Error(ErrorKind::Validation, join_diags(diags)), diags_(std::move(diags)) {}

ModelSpec load_model_text(const std::string& text, const std::string& source) {
  Builder b(source);
  return b.build(text);
}

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : builtin_model_texts()) out.push_back(k);
  return out;
}

ModelSpec load_model(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name_or_path)) return load_model_text(read_file(name_or_path), name_or_path);
  if (const char* env = std::getenv("FJQ_MODEL_PATH")) {
    std::stringstream ss(env);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      if (dir.empty()) continue;
      fs::path p = fs::path(dir) / (name_or_path + ".fjmodel");
      if (fs::is_regular_file(p)) return load_model_text(read_file(p), p.string());
    }
  }
  const auto& texts = builtin_model_texts();
  auto it = texts.find(name_or_path);
  if (it != texts.end()) return load_model_text(it->second, name_or_path);
  std::string names;
  for (const auto& n : builtin_model_names()) names += " " + n;
  throw Error(ErrorKind::UnknownName, "unknown model '" + name_or_path + "'; built-in models:" + names);
}

std::string serialize(const ModelSpec& m) {
  std::string out;
  for (const auto& s : m.sections) {
    if (!out.empty()) out += "\n";
    out += "[" + s.header + "]\n";
    for (const auto& [ln, text] : s.lines) out += text + "\n";
  }
  return out;
}

ModelSpec strip_ansatz(const ModelSpec& m) {
  ModelSpec r = m;
  r.fj.ansatz_modes.clear();
  r.fj.ansatz_inverses.clear();
  std::erase_if(r.sections, [](const ModelSection& s) { return s.header.rfind("ansatz.", 0) == 0; });
  return r;
}

}  // namespace fjq
