#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fjq/rational.hpp"
#include "fjq/symbol.hpp"

namespace fjq {

// Product of parameter powers (Laurent) and field symbols, kept sorted.
struct Monomial {
  std::vector<std::pair<std::string, int>> params;
  std::vector<Symbol> fields;

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;

  Monomial operator*(const Monomial& o) const;
  bool field_free() const { return fields.empty(); }
  int param_power(const std::string& p) const;
};

// Polynomial in field symbols with rational coefficients and Laurent
// monomials in the parameters. Always kept in canonical form.
class Expr {
 public:
  using Terms = std::map<Monomial, Rational>;

  Expr() = default;
  Expr(const Rational& c);
  Expr(long c) : Expr(Rational(c)) {}
  static Expr symbol(const Symbol& s);
  static Expr param(const std::string& name, int power = 1);
  static Expr term(const Monomial& m, const Rational& c);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_field_free() const;
  // Rational constant, if the expression is one (no params, no fields).
  std::optional<Rational> as_rational() const;
  // Single term without fields: c * params.
  bool is_param_monomial() const;

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr operator+(const Expr& o) const;
  Expr operator-(const Expr& o) const;
  Expr operator-() const;
  Expr operator*(const Expr& o) const;
  Expr& operator*=(const Rational& c);
  bool operator==(const Expr& o) const { return terms_ == o.terms_; }
  bool operator<(const Expr& o) const { return terms_ < o.terms_; }

  // Inverse of a single field-free term c*params.
  Expr inverse_monomial() const;

  std::set<Symbol> symbols() const;
  bool depends_on_base(const Symbol& base) const;

  // Replace each symbol s for which f returns a value; derivative tags on s
  // are applied to the replacement.
  Expr substitute(const std::function<std::optional<Expr>(const Symbol&)>& f) const;

  // Drop every term containing a factor for which pred is true.
  Expr drop_terms(const std::function<bool(const Symbol&)>& pred) const;

  // Numeric evaluation with parameter values.
  Rational evaluate(const std::function<Rational(const Symbol&)>& field,
                    const std::map<std::string, Rational>& params) const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

Expr operator*(const Rational& c, const Expr& e);

// Total derivative along dir (0 time, 1, 2 spatial).
Expr apply_partial(int dir, const Expr& e);
Expr apply_partials(const std::array<int, 3>& counts, const Expr& e);

// Variational derivative of the density with respect to the base symbol
// target. Factors are matched when they carry the same time-derivative count
// as target; their spatial tags are integrated by parts. Supports spatial
// order at most max_order (throws UnsupportedOrder beyond).
Expr functional_derivative(const Expr& density, const Symbol& target, int max_order = 1);

// Euler-Lagrange expression: both time and spatial tags are integrated by
// parts. target must be untagged.
Expr euler_lagrange(const Expr& lagrangian, const Symbol& target);

// Coefficients dC/d(d^T target) for every tag pattern T that appears,
// including time tags (the full Frechet derivative of a density).
std::map<std::array<std::uint8_t, 3>, Expr> linear_coefficients(const Expr& density, const Symbol& target);

std::string render(const Expr& e);

}  // namespace fjq
