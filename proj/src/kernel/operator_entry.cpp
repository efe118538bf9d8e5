#include "fjq/operator_entry.hpp"

#include <vector>

#include "fjq/error.hpp"

namespace fjq {

namespace {

long binom(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void add_into(std::map<Multi, Expr>& m, const Multi& a, const Expr& c) {
  if (c.is_zero()) return;
  auto& slot = m[a];
  slot += c;
  if (slot.is_zero()) m.erase(a);
}

// Multiplies the numerator polynomial by (d1^2 + d2^2)^k.
std::map<Multi, Expr> raise(const std::map<Multi, Expr>& m, int k) {
  std::map<Multi, Expr> cur = m;
  for (int s = 0; s < k; ++s) {
    std::map<Multi, Expr> next;
    for (const auto& [a, c] : cur) {
      add_into(next, {a[0] + 2, a[1]}, c);
      add_into(next, {a[0], a[1] + 2}, c);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

OperatorEntry OperatorEntry::scalar(const Expr& c) {
  OperatorEntry o;
  if (!c.is_zero()) o.coeffs_[{0, 0}] = c;
  return o;
}

OperatorEntry OperatorEntry::derivative(int dir, int times) {
  if (dir != 1 && dir != 2) throw Error(ErrorKind::Structural, "operator derivative direction must be 1 or 2");
  OperatorEntry o;
  Multi a{0, 0};
  a[dir - 1] = times;
  o.coeffs_[a] = Expr(1);
  return o;
}

OperatorEntry OperatorEntry::inverse_laplacian(int power) {
  OperatorEntry o;
  o.coeffs_[{0, 0}] = Expr(1);
  o.inv_lap_ = power;
  return o;
}

OperatorEntry OperatorEntry::from_parts(std::map<Multi, Expr> numer, int inv_lap) {
  OperatorEntry o;
  for (auto& [a, c] : numer)
    if (!c.is_zero()) o.coeffs_.emplace(a, std::move(c));
  o.inv_lap_ = inv_lap;
  if (inv_lap < 0) {
    o.coeffs_ = raise(o.coeffs_, -inv_lap);
    o.inv_lap_ = 0;
  }
  o.normalize();
  return o;
}

void OperatorEntry::normalize() {
  if (coeffs_.empty()) {
    inv_lap_ = 0;
    return;
  }
  while (inv_lap_ > 0) {
    // Divide by d1^2 + d2^2, treating d1 as the main variable.
    std::map<Multi, Expr> rem = coeffs_, quot;
    int top = 0;
    for (const auto& [a, c] : rem) top = std::max(top, a[0]);
    for (int a1 = top; a1 >= 2; --a1) {
      std::vector<std::pair<Multi, Expr>> row;
      for (const auto& [a, c] : rem)
        if (a[0] == a1) row.emplace_back(a, c);
      for (const auto& [a, c] : row) {
        add_into(quot, {a1 - 2, a[1]}, c);
        rem.erase(a);
        add_into(rem, {a1 - 2, a[1] + 2}, -c);
      }
    }
    if (!rem.empty()) break;
    coeffs_ = std::move(quot);
    --inv_lap_;
  }
}

bool OperatorEntry::is_constant() const {
  for (const auto& [a, c] : coeffs_)
    if (!c.is_field_free()) return false;
  return true;
}

OperatorEntry OperatorEntry::operator+(const OperatorEntry& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  int p = std::max(inv_lap_, o.inv_lap_);
  auto lhs = raise(coeffs_, p - inv_lap_);
  for (const auto& [a, c] : raise(o.coeffs_, p - o.inv_lap_)) add_into(lhs, a, c);
  return from_parts(std::move(lhs), p);
}

OperatorEntry OperatorEntry::operator-() const {
  OperatorEntry r = *this;
  for (auto& [a, c] : r.coeffs_) c = -c;
  return r;
}

OperatorEntry OperatorEntry::operator-(const OperatorEntry& o) const { return *this + (-o); }

OperatorEntry OperatorEntry::left_multiply(const Expr& c) const {
  std::map<Multi, Expr> m;
  for (const auto& [a, v] : coeffs_) add_into(m, a, c * v);
  return from_parts(std::move(m), inv_lap_);
}

OperatorEntry OperatorEntry::map_coeffs(const std::function<Expr(const Expr&)>& f) const {
  std::map<Multi, Expr> m;
  for (const auto& [a, v] : coeffs_) add_into(m, a, f(v));
  return from_parts(std::move(m), inv_lap_);
}

Expr OperatorEntry::apply(const Expr& f) const {
  if (is_zero() || f.is_zero()) return Expr();
  if (inv_lap_ > 0) throw Error(ErrorKind::Unsupported, "inverse Laplacian cannot act on a field expression");
  Expr out;
  for (const auto& [a, c] : coeffs_) out += c * apply_partials({0, a[0], a[1]}, f);
  return out;
}

OperatorEntry compose(const OperatorEntry& a, const OperatorEntry& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.inv_lap() > 0 && !b.is_constant())
    throw Error(ErrorKind::Unsupported, "inverse Laplacian cannot pass a field-dependent coefficient");
  std::map<Multi, Expr> out;
  for (const auto& [al, ca] : a.coeffs())
    for (const auto& [be, cb] : b.coeffs())
      for (int g1 = 0; g1 <= al[0]; ++g1)
        for (int g2 = 0; g2 <= al[1]; ++g2) {
          Expr dcb = apply_partials({0, g1, g2}, cb);
          if (dcb.is_zero()) continue;
          Expr c = ca * dcb;
          c *= Rational(binom(al[0], g1) * binom(al[1], g2));
          add_into(out, {al[0] - g1 + be[0], al[1] - g2 + be[1]}, c);
        }
  return OperatorEntry::from_parts(std::move(out), a.inv_lap() + b.inv_lap());
}

OperatorEntry adjoint(const OperatorEntry& a) {
  OperatorEntry out;
  for (const auto& [al, c] : a.coeffs()) {
    std::map<Multi, Expr> d;
    d[al] = Expr((al[0] + al[1]) % 2 ? -1 : 1);
    out += compose(OperatorEntry::from_parts(std::move(d), a.inv_lap()), OperatorEntry::scalar(c));
  }
  return out;
}

OperatorEntry linearization(const Expr& density, const Symbol& target) {
  std::map<Multi, Expr> m;
  for (const auto& [tags, c] : linear_coefficients(density, target)) {
    if (tags[0] != target.tags[0]) continue;
    add_into(m, {tags[1], tags[2]}, c);
  }
  return OperatorEntry::from_parts(std::move(m), 0);
}

std::string render(const OperatorEntry& o) {
  if (o.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [a, c] : o.coeffs()) {
    std::string coef = render(c);
    bool single = c.terms().size() == 1;
    bool bare = a[0] == 0 && a[1] == 0;
    std::string ds;
    for (int d = 0; d < 2; ++d) {
      if (a[d] == 0) continue;
      ds += "*D(" + std::to_string(d + 1) + ")";
      if (a[d] > 1) ds += "^" + std::to_string(a[d]);
    }
    std::string term;
    if (single) {
      bool neg = coef[0] == '-';
      std::string mag = neg ? coef.substr(1) : coef;
      if (mag == "1" && !bare) mag.clear();
      term = mag.empty() ? ds.substr(1) : mag + ds;
      if (first) {
        out += (neg ? "-" : "") + term;
      } else {
        out += (neg ? " - " : " + ") + term;
      }
    } else {
      term = "(" + coef + ")" + ds;
      out += (first ? "" : " + ") + term;
    }
    first = false;
  }
  if (o.inv_lap() > 0) {
    if (o.coeffs().size() > 1 || out.find(' ') != std::string::npos) out = "(" + out + ")";
    out += "*invlap";
    if (o.inv_lap() > 1) out += "^" + std::to_string(o.inv_lap());
  }
  return out;
}

}  // namespace fjq
