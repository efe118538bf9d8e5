#pragma once

#include <array>
#include <map>
#include <string>

#include "fjq/expr.hpp"

namespace fjq {

using Multi = std::array<int, 2>;

// Kernel entry  sum_a c_a(x) d1^a1 d2^a2  (d1^2 + d2^2)^(-p)  acting on delta.
// Coefficients stand to the left of all derivatives. The inverse-Laplacian
// power is shared by all summands and reduced whenever the numerator
// polynomial is divisible by d1^2 + d2^2.
class OperatorEntry {
 public:
  OperatorEntry() = default;
  static OperatorEntry scalar(const Expr& c);
  static OperatorEntry identity() { return scalar(Expr(1)); }
  static OperatorEntry derivative(int dir, int times = 1);
  static OperatorEntry inverse_laplacian(int power = 1);
  static OperatorEntry from_parts(std::map<Multi, Expr> numer, int inv_lap);

  const std::map<Multi, Expr>& coeffs() const { return coeffs_; }
  int inv_lap() const { return inv_lap_; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const;

  OperatorEntry operator+(const OperatorEntry& o) const;
  OperatorEntry operator-(const OperatorEntry& o) const;
  OperatorEntry operator-() const;
  OperatorEntry& operator+=(const OperatorEntry& o) { return *this = *this + o; }
  OperatorEntry& operator-=(const OperatorEntry& o) { return *this = *this - o; }
  bool operator==(const OperatorEntry& o) const { return inv_lap_ == o.inv_lap_ && coeffs_ == o.coeffs_; }

  // c * O (c multiplies from the left).
  OperatorEntry left_multiply(const Expr& c) const;

  // O[f]; throws when an inverse Laplacian would act on a field expression.
  Expr apply(const Expr& f) const;

  // Maps every coefficient through f (substitution, reduction, ...).
  OperatorEntry map_coeffs(const std::function<Expr(const Expr&)>& f) const;

 private:
  void normalize();
  std::map<Multi, Expr> coeffs_;
  int inv_lap_ = 0;
};

OperatorEntry compose(const OperatorEntry& a, const OperatorEntry& b);
// Formal adjoint with respect to the spatial integral.
OperatorEntry adjoint(const OperatorEntry& a);

// Frechet derivative of a density: sum_T dC/d(d^T xi) d^T. Spatial tags only;
// factors of target carrying time derivatives are ignored.
OperatorEntry linearization(const Expr& density, const Symbol& target);

std::string render(const OperatorEntry& o);

}  // namespace fjq
