#include "fjq/expr.hpp"

#include <algorithm>
#include <sstream>

#include "fjq/error.hpp"

namespace fjq {

std::string render(const Symbol& s) {
  std::string inner = s.name;
  if (s.internal >= 0 || s.spatial >= 0) {
    inner += "(";
    inner += s.internal >= 0 ? std::to_string(s.internal) : std::string("_");
    if (s.spatial >= 0) inner += "," + std::to_string(s.spatial);
    inner += ")";
  }
  for (int dir = 2; dir >= 1; --dir)
    for (int k = 0; k < s.tags[dir]; ++k) inner = "d(" + std::to_string(dir) + "," + inner + ")";
  for (int k = 0; k < s.tags[0]; ++k) inner = "dt(" + inner + ")";
  return inner;
}

int Monomial::param_power(const std::string& p) const {
  for (const auto& [n, k] : params)
    if (n == p) return k;
  return 0;
}

Monomial Monomial::operator*(const Monomial& o) const {
  Monomial r;
  std::map<std::string, int> pw;
  for (const auto& [n, k] : params) pw[n] += k;
  for (const auto& [n, k] : o.params) pw[n] += k;
  for (const auto& [n, k] : pw)
    if (k != 0) r.params.emplace_back(n, k);
  r.fields.reserve(fields.size() + o.fields.size());
  std::merge(fields.begin(), fields.end(), o.fields.begin(), o.fields.end(), std::back_inserter(r.fields));
  return r;
}

Expr::Expr(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Expr Expr::symbol(const Symbol& s) {
  Monomial m;
  m.fields.push_back(s);
  return term(m, 1);
}

Expr Expr::param(const std::string& name, int power) {
  Monomial m;
  if (power != 0) m.params.emplace_back(name, power);
  return term(m, 1);
}

Expr Expr::term(const Monomial& m, const Rational& c) {
  Expr e;
  e.add_term(m, c);
  return e;
}

void Expr::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0) terms_.erase(it);
}

bool Expr::is_field_free() const {
  for (const auto& [m, c] : terms_)
    if (!m.fields.empty()) return false;
  return true;
}

std::optional<Rational> Expr::as_rational() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_.begin()->first == Monomial{}) return terms_.begin()->second;
  return std::nullopt;
}

bool Expr::is_param_monomial() const { return terms_.size() == 1 && terms_.begin()->first.fields.empty(); }

Expr& Expr::operator+=(const Expr& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Expr Expr::operator+(const Expr& o) const {
  Expr r = *this;
  r += o;
  return r;
}

Expr Expr::operator-(const Expr& o) const {
  Expr r = *this;
  r -= o;
  return r;
}

Expr Expr::operator-() const {
  Expr r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Expr Expr::operator*(const Expr& o) const {
  Expr r;
  for (const auto& [m1, c1] : terms_)
    for (const auto& [m2, c2] : o.terms_) r.add_term(m1 * m2, c1 * c2);
  return r;
}

Expr& Expr::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Expr operator*(const Rational& c, const Expr& e) {
  Expr r = e;
  r *= c;
  return r;
}

Expr Expr::inverse_monomial() const {
  if (!is_param_monomial()) throw Error(ErrorKind::Unsupported, "cannot invert non-monomial expression " + render(*this));
  const auto& [m, c] = *terms_.begin();
  Monomial inv;
  for (const auto& [n, k] : m.params) inv.params.emplace_back(n, -k);
  return term(inv, 1 / c);
}

std::set<Symbol> Expr::symbols() const {
  std::set<Symbol> out;
  for (const auto& [m, c] : terms_) out.insert(m.fields.begin(), m.fields.end());
  return out;
}

bool Expr::depends_on_base(const Symbol& base) const {
  for (const auto& [m, c] : terms_)
    for (const auto& f : m.fields)
      if (f.same_base(base)) return true;
  return false;
}

Expr Expr::substitute(const std::function<std::optional<Expr>(const Symbol&)>& f) const {
  Expr out;
  for (const auto& [m, c] : terms_) {
    Monomial rest;
    rest.params = m.params;
    Expr acc = Expr::term(rest, c);
    for (const auto& s : m.fields) {
      auto rep = f(s.base());
      if (rep) {
        acc = acc * apply_partials({s.tags[0], s.tags[1], s.tags[2]}, *rep);
      } else {
        acc = acc * Expr::symbol(s);
      }
    }
    out += acc;
  }
  return out;
}

Expr Expr::drop_terms(const std::function<bool(const Symbol&)>& pred) const {
  Expr out;
  for (const auto& [m, c] : terms_)
    if (std::none_of(m.fields.begin(), m.fields.end(), pred)) out.add_term(m, c);
  return out;
}

Rational Expr::evaluate(const std::function<Rational(const Symbol&)>& field,
                        const std::map<std::string, Rational>& params) const {
  Rational total = 0;
  for (const auto& [m, c] : terms_) {
    Rational v = c;
    for (const auto& [n, k] : m.params) {
      auto it = params.find(n);
      if (it == params.end()) throw Error(ErrorKind::UnknownName, "no value for parameter " + n);
      for (int i = 0; i < std::abs(k); ++i) {
        if (k > 0) v *= it->second;
        else v /= it->second;
      }
    }
    for (const auto& s : m.fields) v *= field(s);
    total += v;
  }
  return total;
}

Expr apply_partial(int dir, const Expr& e) {
  Expr out;
  for (const auto& [m, c] : e.terms()) {
    for (std::size_t p = 0; p < m.fields.size(); ++p) {
      if (p > 0 && m.fields[p] == m.fields[p - 1]) continue;
      std::size_t mult = 1;
      while (p + mult < m.fields.size() && m.fields[p + mult] == m.fields[p]) ++mult;
      Monomial nm;
      nm.params = m.params;
      nm.fields = m.fields;
      nm.fields[p] = m.fields[p].derived(dir);
      std::sort(nm.fields.begin(), nm.fields.end());
      out += Expr::term(nm, c * static_cast<long>(mult));
    }
  }
  return out;
}

Expr apply_partials(const std::array<int, 3>& counts, const Expr& e) {
  Expr r = e;
  for (int dir = 0; dir < 3; ++dir)
    for (int k = 0; k < counts[dir]; ++k) r = apply_partial(dir, r);
  return r;
}

namespace {

// Removes one copy of the factor at position p.
Monomial without(const Monomial& m, std::size_t p) {
  Monomial r;
  r.params = m.params;
  r.fields = m.fields;
  r.fields.erase(r.fields.begin() + static_cast<long>(p));
  return r;
}

template <class Match, class Emit>
void each_factor(const Expr& e, Match match, Emit emit) {
  for (const auto& [m, c] : e.terms()) {
    for (std::size_t p = 0; p < m.fields.size(); ++p) {
      if (p > 0 && m.fields[p] == m.fields[p - 1]) continue;
      if (!match(m.fields[p])) continue;
      std::size_t mult = 1;
      while (p + mult < m.fields.size() && m.fields[p + mult] == m.fields[p]) ++mult;
      emit(m.fields[p], Expr::term(without(m, p), c * static_cast<long>(mult)));
    }
  }
}

}  // namespace

std::map<std::array<std::uint8_t, 3>, Expr> linear_coefficients(const Expr& density, const Symbol& target) {
  std::map<std::array<std::uint8_t, 3>, Expr> out;
  each_factor(
      density, [&](const Symbol& s) { return s.same_base(target); },
      [&](const Symbol& s, const Expr& coef) { out[s.tags] += coef; });
  for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

Expr functional_derivative(const Expr& density, const Symbol& target, int max_order) {
  Expr out;
  each_factor(
      density, [&](const Symbol& s) { return s.same_base(target) && s.tags[0] == target.tags[0]; },
      [&](const Symbol& s, const Expr& coef) {
        int order = s.tags[1] + s.tags[2];
        if (order > max_order)
          throw Error(ErrorKind::UnsupportedOrder, "density depends on spatial derivative of order " +
                                                       std::to_string(order) + " of " + render(target));
        Expr term = apply_partials({0, s.tags[1], s.tags[2]}, coef);
        if (order % 2) term = -term;
        out += term;
      });
  return out;
}

Expr euler_lagrange(const Expr& lagrangian, const Symbol& target) {
  Expr out;
  each_factor(
      lagrangian, [&](const Symbol& s) { return s.same_base(target); },
      [&](const Symbol& s, const Expr& coef) {
        Expr term = apply_partials({s.tags[0], s.tags[1], s.tags[2]}, coef);
        if (s.order() % 2) term = -term;
        out += term;
      });
  return out;
}

std::string render(const Expr& e) {
  if (e.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : e.terms()) {
    Rational a = abs(c);
    bool neg = c < 0;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    std::vector<std::string> parts;
    bool bare = m.params.empty() && m.fields.empty();
    if (a != 1 || bare) parts.push_back(a.get_str());
    for (const auto& [n, k] : m.params) parts.push_back(k == 1 ? n : n + "^" + std::to_string(k));
    for (const auto& s : m.fields) parts.push_back(render(s));
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "*" : "") << parts[i];
  }
  return os.str();
}

}  // namespace fjq
