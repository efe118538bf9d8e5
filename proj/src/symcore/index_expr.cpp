#include "fjq/index_expr.hpp"

#include <cctype>
#include <functional>

#include "fjq/error.hpp"

namespace fjq {

namespace {

bool spatial_letter(const std::string& s) {
  if (s.empty() || std::string("ijklmn").find(s[0]) == std::string::npos) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])) && s[i] != '\'') return false;
  return true;
}

bool internal_letter(const std::string& s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i])) && s[i] != '\'') return false;
  return true;
}

bool spacetime_word(const std::string& s) {
  static const std::set<std::string> words{"mu", "nu", "rho", "sigma", "tau"};
  std::string stem = s;
  while (!stem.empty() && (std::isdigit(static_cast<unsigned char>(stem.back())) || stem.back() == '\'')) stem.pop_back();
  return words.count(stem) > 0;
}

const std::set<std::string> kTensors{"eta", "etainv", "delta", "eps3", "eps", "epsst"};

struct Token {
  enum Type { Int, Ident, Sym, End } type = End;
  std::string text;
  int line = 1, column = 1;
};

class Lexer {
 public:
  Lexer(const std::string& s, int line, int column) : s_(s), line_(line), col0_(column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s_.size()) {
      char c = s_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      Token t;
      t.line = line_;
      t.column = col0_ + static_cast<int>(i);
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        t.type = Token::Int;
        t.text = s_.substr(i, j - i);
        i = j;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_' || s_[j] == '\'')) ++j;
        t.type = Token::Ident;
        t.text = s_.substr(i, j - i);
        i = j;
      } else if (std::string("()+-*/^,").find(c) != std::string::npos) {
        t.type = Token::Sym;
        t.text = std::string(1, c);
        ++i;
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      out.push_back(t);
    }
    Token end;
    end.line = line_;
    end.column = col0_ + static_cast<int>(s_.size());
    out.push_back(end);
    return out;
  }

 private:
  const std::string& s_;
  int line_, col0_;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseContext& ctx) : t_(std::move(toks)), ctx_(ctx) {}

  NodePtr parse_all() {
    NodePtr n = expr();
    if (peek().type != Token::End) fail("unexpected '" + peek().text + "'");
    return n;
  }

 private:
  const Token& peek() const { return t_[pos_]; }
  Token next() { return t_[pos_++]; }
  bool accept(const std::string& sym) {
    if (peek().type == Token::Sym && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(const std::string& sym) {
    if (!accept(sym)) fail("expected '" + sym + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, peek().column); }

  NodePtr make(Node::Kind k, const Token& at) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->line = at.line;
    n->column = at.column;
    return n;
  }

  NodePtr expr() {
    Token at = peek();
    NodePtr first = term();
    if (!(peek().type == Token::Sym && (peek().text == "+" || peek().text == "-"))) return first;
    NodePtr sum = make(Node::Add, at);
    sum->kids.push_back(first);
    while (peek().type == Token::Sym && (peek().text == "+" || peek().text == "-")) {
      Token op = next();
      NodePtr rhs = term();
      if (op.text == "-") {
        NodePtr neg = make(Node::Neg, op);
        neg->kids.push_back(rhs);
        rhs = neg;
      }
      sum->kids.push_back(rhs);
    }
    return sum;
  }

  NodePtr term() {
    Token at = peek();
    NodePtr acc = unary();
    while (peek().type == Token::Sym && (peek().text == "*" || peek().text == "/")) {
      Token op = next();
      NodePtr rhs = unary();
      if (op.text == "/") {
        NodePtr d = make(Node::Div, op);
        d->kids = {acc, rhs};
        acc = d;
      } else if (acc->kind == Node::Mul) {
        acc->kids.push_back(rhs);
      } else {
        NodePtr m = make(Node::Mul, at);
        m->kids = {acc, rhs};
        acc = m;
      }
    }
    return acc;
  }

  NodePtr unary() {
    Token at = peek();
    if (accept("-")) {
      NodePtr n = make(Node::Neg, at);
      n->kids.push_back(unary());
      return n;
    }
    if (accept("+")) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    Token at = peek();
    if (!accept("^")) return base;
    bool neg = accept("-");
    if (peek().type != Token::Int) fail("expected integer exponent");
    int e = std::stoi(next().text);
    NodePtr p = make(Node::Pow, at);
    p->kids.push_back(base);
    p->power = neg ? -e : e;
    return p;
  }

  IndexArg index_arg() {
    IndexArg a;
    if (peek().type == Token::Int) {
      a.value = std::stoi(next().text);
      if (a.value > 2) fail("index value out of range");
      return a;
    }
    if (peek().type == Token::Ident) {
      Token t = next();
      if (t.text == "_") return a;
      if (!is_index_name(t.text)) throw ParseError("'" + t.text + "' is not an index name", t.line, t.column);
      a.name = t.text;
      return a;
    }
    fail("expected index");
  }

  NodePtr primary() {
    Token at = peek();
    if (peek().type == Token::Int) {
      NodePtr n = make(Node::Num, at);
      n->num = Rational(next().text);
      return n;
    }
    if (accept("(")) {
      NodePtr n = expr();
      expect(")");
      return n;
    }
    if (peek().type != Token::Ident) fail(peek().type == Token::End ? "unexpected end of input" : "unexpected '" + peek().text + "'");
    std::string name = next().text;
    if (name == "invlap") return make(Node::InvLap, at);
    if (!accept("(")) {
      if (ctx_.params.count(name)) {
        NodePtr n = make(Node::Param, at);
        n->name = name;
        return n;
      }
      NodePtr n = make(Node::Field, at);
      n->name = name;
      return n;
    }
    if (name == "d" || name == "dt") {
      NodePtr n = make(Node::Deriv, at);
      if (name == "d") {
        n->idx.push_back(index_arg());
        expect(",");
      } else {
        IndexArg a;
        a.value = 0;
        n->idx.push_back(a);
      }
      n->kids.push_back(expr());
      expect(")");
      return n;
    }
    if (name == "D") {
      NodePtr n = make(Node::OpD, at);
      n->idx.push_back(index_arg());
      expect(")");
      return n;
    }
    NodePtr n = make(kTensors.count(name) ? Node::Tensor : Node::Field, at);
    n->name = name;
    if (!accept(")")) {
      do n->idx.push_back(index_arg());
      while (accept(","));
      expect(")");
    }
    if (n->kind == Node::Tensor) check_tensor(*n);
    else resolve_field(*n);
    return n;
  }

  void check_tensor(const Node& n) {
    std::size_t want = (n.name == "eps3" || n.name == "epsst") ? 3 : 2;
    if (n.idx.size() != want)
      throw ParseError(n.name + " takes " + std::to_string(want) + " indices", n.line, n.column);
    for (const auto& a : n.idx)
      if (a.absent()) throw ParseError("missing index in " + n.name, n.line, n.column);
  }

  void resolve_field(Node& n) {
    auto it = ctx_.fields.find(n.name);
    auto bad = [&](const std::string& m) { throw ParseError(m, n.line, n.column); };
    if (it != ctx_.fields.end()) {
      const FieldDecl& d = it->second;
      std::size_t want = (d.has_internal ? 1 : 0) + (d.has_spatial ? 1 : 0);
      if (n.idx.size() != want) bad(n.name + " takes " + std::to_string(want) + " indices");
      int k = 0;
      if (d.has_internal) n.internal_arg = k++;
      if (d.has_spatial) n.spatial_arg = k++;
      n.internal_up = d.internal_up;
      n.variance_known = d.variance_known;
    } else if (n.idx.size() == 2) {
      n.variance_known = false;
      n.internal_arg = 0;
      n.spatial_arg = 1;
    } else if (n.idx.size() == 1) {
      const IndexArg& a = n.idx[0];
      if (!a.name.empty() && index_kind_of(a.name) != IndexKind::Internal) n.spatial_arg = 0;
      else n.internal_arg = 0;
      n.variance_known = false;
    } else if (n.idx.size() > 2) {
      bad("too many indices on " + n.name);
    }
    if (n.internal_arg >= 0) {
      const IndexArg& a = n.idx[n.internal_arg];
      if (!a.name.empty() && index_kind_of(a.name) != IndexKind::Internal)
        bad("internal slot of " + n.name + " needs an internal index");
    }
    if (n.spatial_arg >= 0) {
      const IndexArg& a = n.idx[n.spatial_arg];
      if (!a.name.empty() && index_kind_of(a.name) == IndexKind::Internal)
        bad("spatial slot of " + n.name + " needs a spatial or spacetime index");
    }
  }

  std::vector<Token> t_;
  std::size_t pos_ = 0;
  const ParseContext& ctx_;
};

[[noreturn]] void structural(const Node& n, const std::string& msg) {
  throw Error(ErrorKind::Structural, std::to_string(n.line) + ":" + std::to_string(n.column) + ": " + msg);
}

// Pairs repeated indices; everything seen once stays free.
void contract(Node& n, const std::vector<FreeIndex>& occ) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<FreeIndex>> by;
  for (const auto& o : occ) {
    if (!by.count(o.name)) order.push_back(o.name);
    by[o.name].push_back(o);
  }
  n.frees.clear();
  n.dummies.clear();
  for (const auto& name : order) {
    const auto& v = by[name];
    if (v.size() == 1) {
      n.frees.push_back(v[0]);
    } else if (v.size() == 2) {
      if (v[0].kind == IndexKind::Internal && v[0].variance != 0 && v[0].variance == v[1].variance)
        structural(n, "internal index " + name + " is contracted without one upper and one lower position");
      n.dummies.push_back(v[0]);
    } else {
      structural(n, "index " + name + " appears " + std::to_string(v.size()) + " times");
    }
  }
}

FreeIndex occurrence(const IndexArg& a, int variance) { return {a.name, index_kind_of(a.name), variance}; }

int levi_civita(int a, int b, int c) {
  if (a == b || b == c || a == c) return 0;
  int inv = (a > b) + (a > c) + (b > c);
  return inv % 2 ? -1 : 1;
}

int resolve(const IndexArg& a, const Binding& b, const Node& n) {
  if (!a.name.empty()) {
    auto it = b.find(a.name);
    if (it == b.end()) structural(n, "index " + a.name + " is not bound");
    return it->second;
  }
  return a.value;
}

Rational tensor_value(const Node& n, const Binding& b) {
  std::vector<int> v;
  for (const auto& a : n.idx) v.push_back(resolve(a, b, n));
  if (n.name == "eta" || n.name == "etainv") return v[0] != v[1] ? 0 : (v[0] == 0 ? -1 : 1);
  if (n.name == "delta") return v[0] == v[1] ? 1 : 0;
  if (n.name == "eps3" || n.name == "epsst") return levi_civita(v[0], v[1], v[2]);
  // eps(i,j) is the spatial part of the spacetime symbol with a leading 0.
  return levi_civita(0, v[0], v[1]);
}

void for_each_assignment(const std::vector<FreeIndex>& dummies, const Binding& b,
                         const std::function<void(const Binding&)>& f) {
  if (dummies.empty()) {
    f(b);
    return;
  }
  std::function<void(std::size_t, Binding&)> rec = [&](std::size_t k, Binding& cur) {
    if (k == dummies.size()) {
      f(cur);
      return;
    }
    for (int v : index_range(dummies[k].kind)) {
      cur[dummies[k].name] = v;
      rec(k + 1, cur);
    }
  };
  Binding cur = b;
  rec(0, cur);
}

OperatorEntry expand_rec(const Node& n, const Binding& b);

Expr scalar_part(const OperatorEntry& o, const Node& n) {
  if (o.is_zero()) return Expr();
  if (o.inv_lap() != 0 || o.coeffs().size() != 1 || !o.coeffs().count({0, 0}))
    structural(n, "operator atom used where a function expression is required");
  return o.coeffs().at({0, 0});
}

OperatorEntry expand_rec(const Node& n, const Binding& b) {
  switch (n.kind) {
    case Node::Num:
      return OperatorEntry::scalar(Expr(n.num));
    case Node::Param:
      return OperatorEntry::scalar(Expr::param(n.name));
    case Node::Field: {
      Symbol s(n.name);
      if (n.internal_arg >= 0) s.internal = resolve(n.idx[n.internal_arg], b, n);
      if (n.spatial_arg >= 0) s.spatial = resolve(n.idx[n.spatial_arg], b, n);
      return OperatorEntry::scalar(Expr::symbol(s));
    }
    case Node::Tensor:
      return OperatorEntry::scalar(Expr(tensor_value(n, b)));
    case Node::Deriv: {
      Expr acc;
      for_each_assignment(n.dummies, b, [&](const Binding& bb) {
        int dir = resolve(n.idx[0], bb, n);
        acc += apply_partial(dir, scalar_part(expand_rec(*n.kids[0], bb), n));
      });
      return OperatorEntry::scalar(acc);
    }
    case Node::OpD: {
      int dir = resolve(n.idx[0], b, n);
      if (dir == 0) structural(n, "D takes a spatial direction");
      return OperatorEntry::derivative(dir);
    }
    case Node::InvLap:
      return OperatorEntry::inverse_laplacian(1);
    case Node::Add: {
      OperatorEntry acc;
      for (const auto& k : n.kids) acc += expand_rec(*k, b);
      return acc;
    }
    case Node::Neg:
      return -expand_rec(*n.kids[0], b);
    case Node::Mul: {
      OperatorEntry acc;
      for_each_assignment(n.dummies, b, [&](const Binding& bb) {
        OperatorEntry prod = expand_rec(*n.kids[0], bb);
        for (std::size_t i = 1; i < n.kids.size() && !prod.is_zero(); ++i) prod = compose(prod, expand_rec(*n.kids[i], bb));
        acc += prod;
      });
      return acc;
    }
    case Node::Div: {
      Expr den = scalar_part(expand_rec(*n.kids[1], b), n);
      if (!den.is_param_monomial()) structural(n, "division by a non-monomial expression");
      return compose(expand_rec(*n.kids[0], b), OperatorEntry::scalar(den.inverse_monomial()));
    }
    case Node::Pow: {
      OperatorEntry base = expand_rec(*n.kids[0], b);
      if (n.power < 0) {
        Expr s = scalar_part(base, n);
        if (!s.is_param_monomial()) structural(n, "negative power of a non-monomial expression");
        base = OperatorEntry::scalar(s.inverse_monomial());
      }
      OperatorEntry acc = OperatorEntry::identity();
      for (int i = 0; i < std::abs(n.power); ++i) acc = compose(acc, base);
      return acc;
    }
  }
  return {};
}

}  // namespace

std::vector<int> index_range(IndexKind k) {
  if (k == IndexKind::Spatial) return {1, 2};
  return {0, 1, 2};
}

bool is_index_name(const std::string& name) {
  return internal_letter(name) || spatial_letter(name) || spacetime_word(name);
}

IndexKind index_kind_of(const std::string& name) {
  if (internal_letter(name)) return IndexKind::Internal;
  if (spatial_letter(name)) return IndexKind::Spatial;
  if (spacetime_word(name)) return IndexKind::Spacetime;
  throw Error(ErrorKind::Structural, "'" + name + "' is not an index name");
}

NodePtr parse(const std::string& text, const ParseContext& ctx, int line, int column) {
  Parser p(Lexer(text, line, column).run(), ctx);
  return p.parse_all();
}

std::vector<FreeIndex> analyze(Node& n) {
  std::vector<FreeIndex> occ;
  switch (n.kind) {
    case Node::Num:
    case Node::Param:
    case Node::InvLap:
      break;
    case Node::OpD:
      if (!n.idx[0].name.empty()) occ.push_back(occurrence(n.idx[0], 0));
      break;
    case Node::Field:
      for (std::size_t i = 0; i < n.idx.size(); ++i) {
        if (n.idx[i].name.empty()) continue;
        int var = static_cast<int>(i) == n.internal_arg && n.variance_known ? (n.internal_up ? 1 : -1) : 0;
        occ.push_back(occurrence(n.idx[i], var));
      }
      break;
    case Node::Tensor: {
      std::vector<int> var(n.idx.size(), 0);
      if (n.name == "eta" || n.name == "eps3") var.assign(n.idx.size(), -1);
      if (n.name == "etainv") var.assign(n.idx.size(), 1);
      if (n.name == "delta") var = {1, -1};
      for (std::size_t i = 0; i < n.idx.size(); ++i) {
        if (n.idx[i].name.empty()) continue;
        FreeIndex f = occurrence(n.idx[i], var[i]);
        if (f.kind != IndexKind::Internal) f.variance = 0;
        occ.push_back(f);
      }
      break;
    }
    case Node::Deriv:
      if (!n.idx[0].name.empty()) occ.push_back(occurrence(n.idx[0], 0));
      for (const auto& f : analyze(*n.kids[0])) occ.push_back(f);
      break;
    case Node::Mul:
      for (auto& k : n.kids)
        for (const auto& f : analyze(*k)) occ.push_back(f);
      break;
    case Node::Add: {
      std::vector<FreeIndex> first = analyze(*n.kids[0]);
      std::set<std::string> names;
      for (const auto& f : first) names.insert(f.name);
      for (std::size_t i = 1; i < n.kids.size(); ++i) {
        std::set<std::string> other;
        for (const auto& f : analyze(*n.kids[i])) other.insert(f.name);
        if (other != names) {
          std::string a, b;
          for (const auto& s : names) a += " " + s;
          for (const auto& s : other) b += " " + s;
          structural(*n.kids[i], "summands have different free indices {" + a + " } and {" + b + " }");
        }
      }
      n.frees = first;
      n.dummies.clear();
      return n.frees;
    }
    case Node::Neg:
      n.frees = analyze(*n.kids[0]);
      return n.frees;
    case Node::Div:
      n.frees = analyze(*n.kids[0]);
      if (!analyze(*n.kids[1]).empty()) structural(n, "denominator carries free indices");
      return n.frees;
    case Node::Pow:
      n.frees = analyze(*n.kids[0]);
      if (!n.frees.empty() && n.power != 1) structural(n, "power of an expression with free indices");
      return n.frees;
  }
  contract(n, occ);
  if ((n.kind == Node::Field || n.kind == Node::Tensor) && !n.dummies.empty())
    structural(n, "index " + n.dummies[0].name + " repeated inside " + n.name);
  return n.frees;
}

Expr expand_expr(const Node& n, const Binding& b) { return scalar_part(expand_rec(n, b), n); }

OperatorEntry expand_op(const Node& n, const Binding& b) { return expand_rec(n, b); }

static NodePtr prepared(const std::string& text, const ParseContext& ctx, const Binding& b) {
  NodePtr n = parse(text, ctx);
  for (const auto& f : analyze(*n))
    if (!b.count(f.name)) structural(*n, "free index " + f.name + " is not bound");
  return n;
}

Expr parse_expr(const std::string& text, const ParseContext& ctx, const Binding& b) {
  return expand_expr(*prepared(text, ctx, b), b);
}

OperatorEntry parse_op(const std::string& text, const ParseContext& ctx, const Binding& b) {
  return expand_op(*prepared(text, ctx, b), b);
}

std::vector<Binding> enumerate_bindings(const std::vector<FreeIndex>& frees) {
  std::vector<Binding> out;
  Node dummy;
  for_each_assignment(frees, {}, [&](const Binding& b) { out.push_back(b); });
  return out;
}

std::vector<Symbol> VariableDecl::components() const {
  std::vector<int> internals = field.has_internal ? std::vector<int>{0, 1, 2} : std::vector<int>{-1};
  std::vector<int> spatials{-1};
  if (field.has_spatial) {
    if (spatial_value >= 0) spatials = {spatial_value};
    else spatials = index_range(index_kind_of(spatial_name));
  }
  std::vector<Symbol> out;
  for (int a : internals)
    for (int s : spatials) out.emplace_back(field.name, a, s);
  return out;
}

VariableDecl parse_declaration(const std::string& text, int line, int column) {
  VariableDecl d;
  std::size_t i = 0;
  auto err = [&](const std::string& m) { throw ParseError(m, line, column + static_cast<int>(i)); };
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  std::size_t s = i;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
  d.field.name = text.substr(s, i - s);
  if (d.field.name.empty()) err("expected a name");
  skip();
  if (i == text.size()) return d;
  if (text[i] != '(') err("expected '('");
  ++i;
  std::vector<std::string> args;
  std::string cur;
  for (; i < text.size() && text[i] != ')'; ++i) {
    if (text[i] == ',') {
      args.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
      cur += text[i];
    }
  }
  if (i == text.size()) err("expected ')'");
  args.push_back(cur);
  ++i;
  skip();
  if (i != text.size()) err("trailing characters after declaration");
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string a = args[k];
    if (a.empty()) err("empty index");
    char last = a.back();
    if (last == '^' || last == '_') {
      std::string base = a.substr(0, a.size() - 1);
      if (!internal_letter(base) || d.field.has_internal || k != 0) err("bad internal index '" + a + "'");
      d.field.has_internal = true;
      d.field.internal_up = last == '^';
      d.internal_name = base;
      continue;
    }
    if (internal_letter(a) && k == 0) {
      d.field.has_internal = true;
      d.internal_name = a;
      continue;
    }
    if (d.field.has_spatial) err("too many indices");
    d.field.has_spatial = true;
    if (std::isdigit(static_cast<unsigned char>(a[0]))) {
      d.spatial_value = std::stoi(a);
      if (d.spatial_value > 2) err("spatial slot out of range");
    } else if (spatial_letter(a) || spacetime_word(a)) {
      d.spatial_name = a;
    } else {
      err("bad spatial index '" + a + "'");
    }
  }
  return d;
}

}  // namespace fjq
