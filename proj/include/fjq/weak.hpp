#pragma once

#include <vector>

#include "fjq/expr.hpp"

namespace fjq {

// Reduction modulo constraint densities and their spatial derivatives.
// Each constraint contributes one rewrite rule for a linear leading symbol.
class WeakReducer {
 public:
  struct Rule {
    Symbol lead;
    Expr rhs;  // lead == rhs on the constraint surface
  };

  // Returns false when the constraint is already weakly zero or has no
  // usable leading term.
  bool add(const Expr& constraint);
  Expr reduce(const Expr& e) const;
  bool weakly_zero(const Expr& e) const { return reduce(e).is_zero(); }
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

}  // namespace fjq
