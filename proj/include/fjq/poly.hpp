#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fjq/rational.hpp"

namespace fjq {

// Multivariate polynomial over Q in a fixed number of variables.
class Poly {
 public:
  using Exps = std::vector<int>;

  explicit Poly(int nvars = 0) : n_(nvars) {}
  static Poly constant(int nvars, const Rational& c);
  static Poly variable(int nvars, int v, int power = 1);
  static Poly monomial(const Exps& e, const Rational& c);

  int nvars() const { return n_; }
  const std::map<Exps, Rational>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool is_constant() const;
  int degree(int v) const;
  // Coefficient of x_v^d as a polynomial without x_v.
  Poly coeff(int v, int d) const;
  // Lex-leading term.
  std::pair<Exps, Rational> lead() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator-() const;
  Poly operator*(const Poly& o) const;
  Poly scaled(const Rational& c) const;
  bool operator==(const Poly& o) const { return t_ == o.t_; }
  bool operator!=(const Poly& o) const { return t_ != o.t_; }

  // x_v -> -x_v
  Poly flip(int v) const;
  double evaluate(const std::vector<double>& x) const;
  Rational evaluate_exact(const std::vector<Rational>& x) const;

  void add(const Exps& e, const Rational& c);

 private:
  int n_;
  std::map<Exps, Rational> t_;
};

std::optional<Poly> try_divide(const Poly& a, const Poly& b);
Poly exact_divide(const Poly& a, const Poly& b);
// Greatest common divisor with lex-leading coefficient 1.
Poly gcd(const Poly& a, const Poly& b);
Poly monic(const Poly& a);

class RatFunc {
 public:
  explicit RatFunc(int nvars = 0) : num_(nvars), den_(Poly::constant(nvars, 1)) {}
  RatFunc(Poly num, Poly den);
  explicit RatFunc(const Poly& num) : RatFunc(num, Poly::constant(num.nvars(), 1)) {}

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }

  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator-() const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;
  bool operator==(const RatFunc& o) const { return num_ == o.num_ && den_ == o.den_; }

  RatFunc flip(int v) const { return RatFunc(num_.flip(v), den_.flip(v)); }
  double evaluate(const std::vector<double>& x) const { return num_.evaluate(x) / den_.evaluate(x); }

 private:
  Poly num_, den_;
};

std::string render(const Poly& p, const std::vector<std::string>& names);

}  // namespace fjq
