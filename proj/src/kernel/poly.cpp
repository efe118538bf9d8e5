#include "fjq/poly.hpp"

#include <cmath>
#include <sstream>

#include "fjq/error.hpp"

namespace fjq {

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  p.add(Exps(nvars, 0), c);
  return p;
}

Poly Poly::variable(int nvars, int v, int power) {
  Exps e(nvars, 0);
  e[v] = power;
  return monomial(e, 1);
}

Poly Poly::monomial(const Exps& e, const Rational& c) {
  Poly p(static_cast<int>(e.size()));
  p.add(e, c);
  return p;
}

void Poly::add(const Exps& e, const Rational& c) {
  if (c == 0) return;
  auto it = t_.find(e);
  if (it == t_.end()) {
    t_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second == 0) t_.erase(it);
}

bool Poly::is_constant() const {
  if (t_.empty()) return true;
  if (t_.size() > 1) return false;
  for (int x : t_.begin()->first)
    if (x) return false;
  return true;
}

int Poly::degree(int v) const {
  int d = 0;
  for (const auto& [e, c] : t_) d = std::max(d, e[v]);
  return d;
}

Poly Poly::coeff(int v, int d) const {
  Poly r(n_);
  for (const auto& [e, c] : t_)
    if (e[v] == d) {
      Exps f = e;
      f[v] = 0;
      r.add(f, c);
    }
  return r;
}

std::pair<Poly::Exps, Rational> Poly::lead() const { return *t_.rbegin(); }

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [e, c] : o.t_) r.add(e, c);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r = *this;
  for (const auto& [e, c] : o.t_) r.add(e, -c);
  return r;
}

Poly Poly::operator-() const { return scaled(-1); }

Poly Poly::operator*(const Poly& o) const {
  Poly r(n_);
  Exps e(n_);
  for (const auto& [a, ca] : t_)
    for (const auto& [b, cb] : o.t_) {
      for (int k = 0; k < n_; ++k) e[k] = a[k] + b[k];
      r.add(e, ca * cb);
    }
  return r;
}

Poly Poly::scaled(const Rational& c) const {
  Poly r(n_);
  if (c == 0) return r;
  r.t_ = t_;
  for (auto& [e, v] : r.t_) v *= c;
  return r;
}

Poly Poly::flip(int v) const {
  Poly r = *this;
  for (auto& [e, c] : r.t_)
    if (e[v] % 2) c = -c;
  return r;
}

double Poly::evaluate(const std::vector<double>& x) const {
  double s = 0;
  for (const auto& [e, c] : t_) {
    double v = c.get_d();
    for (int k = 0; k < n_; ++k) v *= std::pow(x[k], e[k]);
    s += v;
  }
  return s;
}

Rational Poly::evaluate_exact(const std::vector<Rational>& x) const {
  Rational s = 0;
  for (const auto& [e, c] : t_) {
    Rational v = c;
    for (int k = 0; k < n_; ++k)
      for (int j = 0; j < e[k]; ++j) v *= x[k];
    s += v;
  }
  return s;
}

std::optional<Poly> try_divide(const Poly& a, const Poly& b) {
  if (b.is_zero()) throw Error(ErrorKind::Singular, "polynomial division by zero");
  Poly q(a.nvars()), r = a;
  auto [lb, cb] = b.lead();
  while (!r.is_zero()) {
    auto [lr, cr] = r.lead();
    Poly::Exps e(a.nvars());
    for (int k = 0; k < a.nvars(); ++k) {
      e[k] = lr[k] - lb[k];
      if (e[k] < 0) return std::nullopt;
    }
    Poly t = Poly::monomial(e, cr / cb);
    q = q + t;
    r = r - t * b;
  }
  return q;
}

Poly exact_divide(const Poly& a, const Poly& b) {
  auto q = try_divide(a, b);
  if (!q) throw Error(ErrorKind::Unsupported, "inexact polynomial division");
  return *q;
}

Poly monic(const Poly& a) {
  if (a.is_zero()) return a;
  return a.scaled(1 / a.lead().second);
}

namespace {

int lowest_var(const Poly& a, const Poly& b) {
  for (int v = 0; v < a.nvars(); ++v)
    if (a.degree(v) > 0 || b.degree(v) > 0) return v;
  return -1;
}

Poly content(const Poly& p, int v) {
  Poly g(p.nvars());
  for (int d = p.degree(v); d >= 0; --d) {
    Poly c = p.coeff(v, d);
    if (c.is_zero()) continue;
    g = g.is_zero() ? monic(c) : gcd(g, c);
    if (g.is_constant()) break;
  }
  return g;
}

Poly primitive(const Poly& p, int v) {
  if (p.is_zero()) return p;
  return exact_divide(p, content(p, v));
}

Poly prem(const Poly& a, const Poly& b, int v) {
  int db = b.degree(v);
  Poly lb = b.coeff(v, db);
  Poly r = a;
  while (!r.is_zero() && r.degree(v) >= db) {
    int dr = r.degree(v);
    Poly lr = r.coeff(v, dr);
    r = lb * r - lr * Poly::variable(a.nvars(), v, dr - db) * b;
  }
  return r;
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  int v = lowest_var(a, b);
  if (v < 0) return Poly::constant(a.nvars(), 1);
  if (a.degree(v) == 0) return gcd(a, content(b, v));
  if (b.degree(v) == 0) return gcd(content(a, v), b);
  Poly ca = content(a, v), cb = content(b, v);
  Poly pa = exact_divide(a, ca), pb = exact_divide(b, cb);
  Poly c = gcd(ca, cb);
  if (pa.degree(v) < pb.degree(v)) std::swap(pa, pb);
  while (!pb.is_zero()) {
    Poly r = prem(pa, pb, v);
    pa = pb;
    pb = primitive(r, v);
  }
  if (pa.degree(v) == 0) return monic(c);
  return monic(c * primitive(pa, v));
}

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw Error(ErrorKind::Singular, "rational function with zero denominator");
  if (num_.is_zero()) {
    den_ = Poly::constant(num_.nvars(), 1);
    return;
  }
  if (!den_.is_constant()) {
    Poly g = gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = exact_divide(num_, g);
      den_ = exact_divide(den_, g);
    }
  }
  Rational lc = den_.lead().second;
  num_ = num_.scaled(1 / lc);
  den_ = den_.scaled(1 / lc);
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  if (den_ == o.den_) return RatFunc(num_ + o.num_, den_);
  return RatFunc(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

RatFunc RatFunc::operator-() const {
  RatFunc r = *this;
  r.num_ = -r.num_;
  return r;
}

RatFunc RatFunc::operator-(const RatFunc& o) const { return *this + (-o); }

RatFunc RatFunc::operator*(const RatFunc& o) const {
  if (is_zero() || o.is_zero()) return RatFunc(num_.nvars());
  return RatFunc(num_ * o.num_, den_ * o.den_);
}

RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.is_zero()) throw Error(ErrorKind::Singular, "division by zero rational function");
  return RatFunc(num_ * o.den_, den_ * o.num_);
}

std::string render(const Poly& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    Rational a = abs(c);
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    first = false;
    std::string mon;
    for (int k = 0; k < p.nvars(); ++k) {
      if (!e[k]) continue;
      if (!mon.empty()) mon += "*";
      mon += names[k];
      if (e[k] > 1) mon += "^" + std::to_string(e[k]);
    }
    if (mon.empty()) os << a.get_str();
    else if (a == 1) os << mon;
    else os << a.get_str() << "*" << mon;
  }
  return os.str();
}

}  // namespace fjq
